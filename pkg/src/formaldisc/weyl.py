"""The truncated Weyl algebra D_p in normal-ordered canonical form.

Generators x_1..x_d, y_1..y_d, h with [x_i, y_j] = delta_ij h and all other
generator brackets zero; h is central of weight 2.  Elements are stored as
finite sums of normal-ordered words x^a y^b h^c (all x's left of all y's),
truncated at h-order p and weight N.  Both truncations are quotients by
two-sided ideals (the relation is weight-homogeneous), so ring identities
hold exactly at every truncation.

Products are computed by rewriting: an element is multiplied by one generator
at a time, each step applying the defining relation y_j x_i -> x_i y_j -
delta_ij h.  No closed-form product kernel is used on this path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InternalError, UsageError
from .series import Monomial, TruncatedPoly, standard_poisson, unit_monomial


@dataclass(frozen=True)
class TruncationSpec:
    """Working truncation: D / h^(p+1) D at weight cutoff N, dimension d."""

    d: int
    h_order: int
    cutoff: int

    def __post_init__(self):
        if self.d < 1:
            raise UsageError(f"dimension must be >= 1, got {self.d}")
        if self.h_order < 0 or self.cutoff < 0:
            raise UsageError("h_order and cutoff must be non-negative")

    def deepen(self, extra_h: int = 0, extra_weight: int = 0) -> "TruncationSpec":
        return TruncationSpec(self.d, self.h_order + extra_h, self.cutoff + extra_weight)


class WeylElement:
    """Normal-ordered element of D_p: finite map from monomials to rationals.

    Two elements are equal iff their term maps are equal; the map is the
    canonical form.
    """

    __slots__ = ("spec", "terms")

    def __init__(self, spec: TruncationSpec, terms=None):
        self.spec = spec
        clean = {}
        if terms:
            for mono, coeff in terms.items():
                if coeff == 0:
                    continue
                if mono.hexp > spec.h_order or mono.weight > spec.cutoff:
                    continue
                if mono.dimension != spec.d:
                    raise UsageError(f"monomial {mono} does not match d={spec.d}")
                clean[mono] = coeff if isinstance(coeff, Fraction) else Fraction(coeff)
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(spec: TruncationSpec) -> "WeylElement":
        return WeylElement(spec)

    @staticmethod
    def scalar(value, spec: TruncationSpec) -> "WeylElement":
        return WeylElement(spec, {unit_monomial(spec.d): Fraction(value)})

    @staticmethod
    def one(spec: TruncationSpec) -> "WeylElement":
        return WeylElement.scalar(1, spec)

    @staticmethod
    def generator(name: str, spec: TruncationSpec) -> "WeylElement":
        kind, index = parse_generator(name, spec.d)
        d = spec.d
        if kind == "x":
            mono = Monomial(
                tuple(1 if j == index else 0 for j in range(d)), (0,) * d, 0
            )
        elif kind == "y":
            mono = Monomial(
                (0,) * d, tuple(1 if j == index else 0 for j in range(d)), 0
            )
        else:
            mono = Monomial((0,) * d, (0,) * d, 1)
        return WeylElement(spec, {mono: Fraction(1)})

    @staticmethod
    def from_poly(p: TruncatedPoly, spec: TruncationSpec) -> "WeylElement":
        """Normal-order symbol lift: each monomial maps to its ordered word."""
        if p.d != spec.d:
            raise UsageError("dimension mismatch in lift")
        if p.cutoff != spec.cutoff:
            raise UsageError("cutoff mismatch in lift")
        return WeylElement(spec, dict(p.terms))

    # -- linear structure ----------------------------------------------------

    def _check_compat(self, other: "WeylElement"):
        if self.spec != other.spec:
            raise UsageError(f"truncation mismatch: {self.spec} vs {other.spec}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = WeylElement.scalar(other, self.spec)
        if not isinstance(other, WeylElement):
            return NotImplemented
        self._check_compat(other)
        terms = dict(self.terms)
        for mono, coeff in other.terms.items():
            acc = terms.get(mono, Fraction(0)) + coeff
            if acc == 0:
                terms.pop(mono, None)
            else:
                terms[mono] = acc
        return WeylElement(self.spec, terms)

    __radd__ = __add__

    def __neg__(self):
        return WeylElement(self.spec, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = WeylElement.scalar(other, self.spec)
        if not isinstance(other, WeylElement):
            return NotImplemented
        return self + (-other)

    def scaled(self, value) -> "WeylElement":
        value = Fraction(value)
        return WeylElement(self.spec, {m: c * value for m, c in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, WeylElement):
            return NotImplemented
        return self.spec == other.spec and self.terms == other.terms

    def __hash__(self):
        return hash((self.spec, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())

    def symbol(self) -> TruncatedPoly:
        """The normal-order symbol: the same exponents read commutatively."""
        return TruncatedPoly(self.spec.d, self.spec.cutoff, dict(self.terms))

    def respec(self, spec: TruncationSpec) -> "WeylElement":
        """Reinterpret under another truncation.

        Deepening (larger p or N) is the canonical lift of the stored normal
        form; shallowing is the quotient map.
        """
        if spec.d != self.spec.d:
            raise UsageError("cannot respec across dimensions")
        return WeylElement(spec, dict(self.terms))

    def __str__(self):
        return str(self.symbol())

    def __repr__(self):
        s = self.spec
        return f"WeylElement(d={s.d}, p={s.h_order}, N={s.cutoff}, {self})"

    def to_json(self):
        data = self.symbol().to_json()
        data["p"] = self.spec.h_order
        return data


def parse_generator(name: str, d: int):
    """'x3' -> ('x', 2); 'h' -> ('h', None). Raises on anything else."""
    if name == "h":
        return ("h", None)
    if len(name) >= 2 and name[0] in "xy" and name[1:].isdigit():
        index = int(name[1:]) - 1
        if 0 <= index < d:
            return (name[0], index)
        raise UsageError(f"generator {name} out of range for d={d}")
    raise UsageError(f"unknown generator {name!r}")


# ---------------------------------------------------------------------------
# rewriting
# ---------------------------------------------------------------------------


def _rmul_x(terms, i, spec):
    """Right-multiply a normal form by x_i, applying y x -> x y - h."""
    out = {}
    p, n = spec.h_order, spec.cutoff
    for mono, coeff in terms.items():
        w = mono.weight
        if w + 1 <= n:
            lead = Monomial(
                mono.xexp[:i] + (mono.xexp[i] + 1,) + mono.xexp[i + 1 :],
                mono.yexp,
                mono.hexp,
            )
            acc = out.get(lead, Fraction(0)) + coeff
            if acc == 0:
                out.pop(lead, None)
            else:
                out[lead] = acc
        e = mono.yexp[i]
        if e and mono.hexp + 1 <= p and w + 1 <= n:
            corr = Monomial(
                mono.xexp,
                mono.yexp[:i] + (e - 1,) + mono.yexp[i + 1 :],
                mono.hexp + 1,
            )
            acc = out.get(corr, Fraction(0)) - coeff * e
            if acc == 0:
                out.pop(corr, None)
            else:
                out[corr] = acc
    return out


def _rmul_y(terms, i, spec):
    out = {}
    n = spec.cutoff
    for mono, coeff in terms.items():
        if mono.weight + 1 > n:
            continue
        new = Monomial(
            mono.xexp,
            mono.yexp[:i] + (mono.yexp[i] + 1,) + mono.yexp[i + 1 :],
            mono.hexp,
        )
        out[new] = coeff
    return out


def _rmul_h(terms, spec):
    out = {}
    p, n = spec.h_order, spec.cutoff
    for mono, coeff in terms.items():
        if mono.hexp + 1 > p or mono.weight + 2 > n:
            continue
        out[Monomial(mono.xexp, mono.yexp, mono.hexp + 1)] = coeff
    return out


def _rmul_monomial(terms, mono: Monomial, spec: TruncationSpec):
    """Right-multiply by the word x^a y^b h^c, one generator at a time."""
    for i, e in enumerate(mono.xexp):
        for _ in range(e):
            terms = _rmul_x(terms, i, spec)
    for i, e in enumerate(mono.yexp):
        for _ in range(e):
            terms = _rmul_y(terms, i, spec)
    for _ in range(mono.hexp):
        terms = _rmul_h(terms, spec)
    return terms


def star(a: WeylElement, b: WeylElement) -> WeylElement:
    """Associative product of D_p; concatenation followed by normal ordering."""
    a._check_compat(b)
    spec = a.spec
    total: dict[Monomial, Fraction] = {}
    for mono, coeff in b.terms.items():
        partial = _rmul_monomial(a.terms, mono, spec)
        for m, c in partial.items():
            acc = total.get(m, Fraction(0)) + c * coeff
            if acc == 0:
                total.pop(m, None)
            else:
                total[m] = acc
    return WeylElement(spec, total)


def normal_order(word, spec: TruncationSpec, scalar=1) -> WeylElement:
    """Normal-order a left-to-right word of generators and rational scalars.

    Rewriting applies y_j x_i -> x_i y_j - delta_ij h until no inversion
    remains; the strategy here is deterministic left-to-right, and any other
    strategy yields the same canonical form (confluence).
    """
    element = WeylElement.scalar(scalar, spec)
    for item in word:
        if isinstance(item, (int, Fraction)):
            element = element.scaled(item)
            continue
        kind, index = parse_generator(item, spec.d)
        if kind == "x":
            terms = _rmul_x(element.terms, index, spec)
        elif kind == "y":
            terms = _rmul_y(element.terms, index, spec)
        else:
            terms = _rmul_h(element.terms, spec)
        element = WeylElement(spec, terms)
    return element


def normal_order_random_strategy(word, spec: TruncationSpec, rng, scalar=1) -> WeylElement:
    """Normal-order by applying the rewrite rule at randomly chosen positions.

    A verification utility: rewriting is confluent, so for any strategy this
    agrees with normal_order.  Words are kept explicitly and a random
    inversion y_j x_i is replaced by x_i y_j (- h when i = j) until none is
    left; each step lowers (inversions, length) lexicographically.
    """
    letters = []
    coeff = Fraction(scalar)
    central_h = 0
    for item in word:
        if isinstance(item, (int, Fraction)):
            coeff *= item
            continue
        kind, index = parse_generator(item, spec.d)
        if kind == "h":
            central_h += 1  # h commutes with everything by the relations
        else:
            letters.append((kind, index))
    letters.extend([("h", None)] * central_h)
    sums: dict[tuple, Fraction] = {tuple(letters): coeff}
    while True:
        spots = [
            (w, k)
            for w in sums
            for k in range(len(w) - 1)
            if w[k][0] == "y" and w[k + 1][0] == "x"
        ]
        if not spots:
            break
        w, k = spots[rng.randrange(len(spots))]
        c = sums.pop(w)
        swapped = w[:k] + (w[k + 1], w[k]) + w[k + 2 :]
        sums[swapped] = sums.get(swapped, Fraction(0)) + c
        if w[k][1] == w[k + 1][1]:
            # h is central, so the created h letter may sit at the end
            collapsed = w[:k] + w[k + 2 :] + (("h", None),)
            sums[collapsed] = sums.get(collapsed, Fraction(0)) - c
        sums = {key: val for key, val in sums.items() if val != 0}
    element = WeylElement.zero(spec)
    d = spec.d
    for w, c in sums.items():
        xexp, yexp, hexp = [0] * d, [0] * d, 0
        for kind, index in w:
            if kind == "x":
                xexp[index] += 1
            elif kind == "y":
                yexp[index] += 1
            else:
                hexp += 1
        mono = Monomial(tuple(xexp), tuple(yexp), hexp)
        element = element + WeylElement(spec, {mono: c})
    return element


def commutator(a: WeylElement, b: WeylElement) -> WeylElement:
    return star(a, b) - star(b, a)


def iota(a: WeylElement) -> WeylElement:
    """The antiinvolution fixing x_i, y_i and negating h.

    On a normal-ordered word, iota reverses it: iota(x^a y^b h^c) =
    (-1)^c h^c y^b x^a, which is then re-normal-ordered.
    """
    spec = a.spec
    out = WeylElement.zero(spec)
    for mono, coeff in a.terms.items():
        terms = {unit_monomial(spec.d): Fraction(1)}
        for i, e in enumerate(mono.yexp):
            for _ in range(e):
                terms = _rmul_y(terms, i, spec)
        for i, e in enumerate(mono.xexp):
            for _ in range(e):
                terms = _rmul_x(terms, i, spec)
        for _ in range(mono.hexp):
            terms = _rmul_h(terms, spec)
        sign = -1 if mono.hexp % 2 else 1
        out = out + WeylElement(spec, terms).scaled(coeff * sign)
    return out


def mod_h(a: WeylElement) -> TruncatedPoly:
    """Projection D_p -> A dropping every term divisible by h."""
    return TruncatedPoly(
        a.spec.d,
        a.spec.cutoff,
        {m: c for m, c in a.terms.items() if m.hexp == 0},
    )


def induced_poisson(a: TruncatedPoly, b: TruncatedPoly) -> TruncatedPoly:
    """{a, b} = (1/h)(lift(a) lift(b) - lift(b) lift(a)) mod h.

    Computed with the truncation deepened by one h-order and two weights so
    that the h-linear part of the commutator is exact at the result cutoff.
    The answer does not depend on the choice of lifts.
    """
    a._check_compat(b)
    if a.depends_on_h() or b.depends_on_h():
        raise UsageError("induced_poisson inputs must be h-free")
    inner = TruncationSpec(a.d, 1, a.cutoff + 2)
    wa = WeylElement(inner, dict(a.terms))
    wb = WeylElement(inner, dict(b.terms))
    comm = commutator(wa, wb)
    out = {}
    for mono, coeff in comm.terms.items():
        if mono.hexp < 1:
            raise InternalError(
                f"commutator term {mono} not divisible by h (must never happen)"
            )
        if mono.hexp == 1 and mono.weight - 2 <= a.cutoff:
            out[Monomial(mono.xexp, mono.yexp, 0)] = coeff
    return TruncatedPoly(a.d, a.cutoff, out)


def center_check(a: WeylElement) -> bool:
    """True iff a commutes with every generator, as an element of D.

    The commutators are computed one h-order and one weight deeper than a's
    truncation, so an element only passes when its lift is genuinely central
    (a polynomial in h), not merely central by truncation overflow.
    """
    spec = a.spec
    deep = spec.deepen(extra_h=1, extra_weight=1)
    lifted = a.respec(deep)
    gens = [f"x{i + 1}" for i in range(spec.d)] + [
        f"y{i + 1}" for i in range(spec.d)
    ] + ["h"]
    for name in gens:
        g = WeylElement.generator(name, deep)
        if not commutator(lifted, g).is_zero():
            return False
    return True


# ---------------------------------------------------------------------------
# the iota-split model of D_1 = D / h^2 D
# ---------------------------------------------------------------------------


def mixed_laplacian(p: TruncatedPoly) -> TruncatedPoly:
    """sum_i d/dx_i d/dy_i, the normal-ordering correction operator."""
    out = TruncatedPoly.zero(p.d, p.cutoff)
    for i in range(p.d):
        out = out + p.partial(i).partial(p.d + i)
    return out


def even_lift(a: TruncatedPoly, spec: TruncationSpec) -> WeylElement:
    """The iota-even lift of a function: lift(a) - (h/2) lift(Delta a).

    iota of the normal-ordered word of a equals it plus h times the mixed
    Laplacian correction, so this combination is an iota eigenvector of
    eigenvalue +1.  Requires h_order >= 1.
    """
    if spec.h_order < 1:
        raise UsageError("even_lift needs h_order >= 1")
    if a.depends_on_h():
        raise UsageError("even_lift input must be h-free")
    lifted = WeylElement(spec, dict(a.terms))
    corr = mixed_laplacian(a)
    half_h = {
        Monomial(m.xexp, m.yexp, 1): c * Fraction(-1, 2) for m, c in corr.terms.items()
    }
    return lifted + WeylElement(spec, half_h)


@dataclass(frozen=True)
class D1Element:
    """Element of D_1 in iota-eigenspace coordinates: even part + h odd part.

    Both parts are h-free functions on the disc; the even part sits inside
    D_1 via the iota-even lift and the odd part via multiplication by h.
    """

    even: TruncatedPoly
    odd: TruncatedPoly

    def __post_init__(self):
        self.even._check_compat(self.odd)
        if self.even.depends_on_h() or self.odd.depends_on_h():
            raise UsageError("D1Element parts must be h-free")

    @staticmethod
    def from_function(a: TruncatedPoly) -> "D1Element":
        return D1Element(a, TruncatedPoly.zero(a.d, a.cutoff))

    @staticmethod
    def zero(d: int, cutoff: int) -> "D1Element":
        z = TruncatedPoly.zero(d, cutoff)
        return D1Element(z, z)

    @staticmethod
    def one(d: int, cutoff: int) -> "D1Element":
        return D1Element(TruncatedPoly.one(d, cutoff), TruncatedPoly.zero(d, cutoff))

    def __add__(self, other):
        return D1Element(self.even + other.even, self.odd + other.odd)

    def __sub__(self, other):
        return D1Element(self.even - other.even, self.odd - other.odd)

    def scaled(self, value) -> "D1Element":
        return D1Element(self.even.scaled(value), self.odd.scaled(value))

    def to_weyl(self, spec: TruncationSpec) -> "WeylElement":
        """Transport along the eigenspace identification into D_p, p >= 1."""
        odd_part = {
            Monomial(m.xexp, m.yexp, 1): c for m, c in self.odd.terms.items()
        }
        return even_lift(self.even, spec) + WeylElement(spec, odd_part)

    @staticmethod
    def from_weyl(w: WeylElement) -> "D1Element":
        """Inverse transport, defined on elements with h-order <= 1."""
        d, n = w.spec.d, w.spec.cutoff
        plain = {}
        hpart = {}
        for mono, coeff in w.terms.items():
            if mono.hexp == 0:
                plain[Monomial(mono.xexp, mono.yexp, 0)] = coeff
            elif mono.hexp == 1:
                hpart[Monomial(mono.xexp, mono.yexp, 0)] = coeff
            else:
                raise UsageError("from_weyl needs an element of h-order <= 1")
        even = TruncatedPoly(d, n, plain)
        odd = TruncatedPoly(d, n, hpart) + mixed_laplacian(even).scaled(
            Fraction(1, 2)
        )
        return D1Element(even, odd)


def d1_product(a: D1Element, b: D1Element) -> D1Element:
    """The product of D_1 read through the eigenspace identification.

    On functions it is a * b = ab + (h/2){a, b}: the one-half is forced by
    the identification (the brute-force transport oracle over monomials pins
    it), with the bracket normalized by {x_i, y_j} = delta_ij.
    """
    half_bracket = standard_poisson(a.even, b.even).scaled(Fraction(1, 2))
    return D1Element(
        a.even * b.even,
        a.even * b.odd + a.odd * b.even + half_bracket,
    )


def d1_bracket(a: D1Element, b: D1Element) -> D1Element:
    """The Lie bracket of D_1: the h-linear extension of the Poisson bracket."""
    return D1Element(
        standard_poisson(a.even, b.even),
        standard_poisson(a.even, b.odd) + standard_poisson(a.odd, b.even),
    )

"""Exact sparse arithmetic on the formal polydisc, truncated by weight.

Values live over the rationals in the variables x1..xd, y1..yd and a central
formal parameter h.  Weights are deg(x_i) = deg(y_i) = 1 and deg(h) = 2, so
the Weyl relation upstream stays weight-homogeneous.  Every value carries its
weight cutoff; operations compute exactly and then discard monomials whose
weight exceeds the cutoff.  Mixing values with different cutoff or dimension
raises UsageError, never coerces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import UsageError


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise UsageError(f"not an exact rational: {value!r}")


@dataclass(frozen=True)
class Monomial:
    """x^a y^b h^c with weight |a| + |b| + 2c."""

    xexp: tuple[int, ...]
    yexp: tuple[int, ...]
    hexp: int = 0

    @property
    def weight(self) -> int:
        return sum(self.xexp) + sum(self.yexp) + 2 * self.hexp

    @property
    def dimension(self) -> int:
        return len(self.xexp)

    def sort_key(self):
        # total order: weight, then h-power, then lex on (xexp, yexp)
        return (self.weight, self.hexp, self.xexp, self.yexp)

    def mul(self, other: "Monomial") -> "Monomial":
        return Monomial(
            tuple(a + b for a, b in zip(self.xexp, other.xexp)),
            tuple(a + b for a, b in zip(self.yexp, other.yexp)),
            self.hexp + other.hexp,
        )

    def __str__(self):
        parts = []
        for i, e in enumerate(self.xexp):
            if e == 1:
                parts.append(f"x{i + 1}")
            elif e > 1:
                parts.append(f"x{i + 1}^{e}")
        for i, e in enumerate(self.yexp):
            if e == 1:
                parts.append(f"y{i + 1}")
            elif e > 1:
                parts.append(f"y{i + 1}^{e}")
        if self.hexp == 1:
            parts.append("h")
        elif self.hexp > 1:
            parts.append(f"h^{self.hexp}")
        return "*".join(parts) if parts else "1"


def unit_monomial(d: int) -> Monomial:
    return Monomial((0,) * d, (0,) * d, 0)


class TruncatedPoly:
    """Sparse polynomial over Q in x, y, h, truncated at a weight cutoff.

    Immutable by convention: no method mutates `terms`, and instances may be
    shared freely.  Zero coefficients and over-cutoff monomials are never
    stored, so equal values compare equal as dicts.
    """

    __slots__ = ("d", "cutoff", "terms")

    def __init__(self, d: int, cutoff: int, terms=None):
        if d < 1:
            raise UsageError(f"dimension must be >= 1, got {d}")
        if cutoff < 0:
            raise UsageError(f"cutoff must be >= 0, got {cutoff}")
        self.d = d
        self.cutoff = cutoff
        clean = {}
        if terms:
            for mono, coeff in terms.items():
                coeff = _as_fraction(coeff)
                if coeff == 0 or mono.weight > cutoff:
                    continue
                if mono.dimension != d or len(mono.yexp) != d:
                    raise UsageError(f"monomial {mono} does not match dimension {d}")
                clean[mono] = coeff
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(d: int, cutoff: int) -> "TruncatedPoly":
        return TruncatedPoly(d, cutoff)

    @staticmethod
    def constant(value, d: int, cutoff: int) -> "TruncatedPoly":
        return TruncatedPoly(d, cutoff, {unit_monomial(d): _as_fraction(value)})

    @staticmethod
    def one(d: int, cutoff: int) -> "TruncatedPoly":
        return TruncatedPoly.constant(1, d, cutoff)

    @staticmethod
    def x(i: int, d: int, cutoff: int) -> "TruncatedPoly":
        if not 0 <= i < d:
            raise UsageError(f"x index {i} out of range for d={d}")
        e = tuple(1 if j == i else 0 for j in range(d))
        return TruncatedPoly(d, cutoff, {Monomial(e, (0,) * d, 0): Fraction(1)})

    @staticmethod
    def y(i: int, d: int, cutoff: int) -> "TruncatedPoly":
        if not 0 <= i < d:
            raise UsageError(f"y index {i} out of range for d={d}")
        e = tuple(1 if j == i else 0 for j in range(d))
        return TruncatedPoly(d, cutoff, {Monomial((0,) * d, e, 0): Fraction(1)})

    @staticmethod
    def h(d: int, cutoff: int) -> "TruncatedPoly":
        return TruncatedPoly(d, cutoff, {Monomial((0,) * d, (0,) * d, 1): Fraction(1)})

    @staticmethod
    def coordinate(v: int, d: int, cutoff: int) -> "TruncatedPoly":
        """Coordinate by flat index: 0..d-1 are x's, d..2d-1 are y's."""
        if 0 <= v < d:
            return TruncatedPoly.x(v, d, cutoff)
        if d <= v < 2 * d:
            return TruncatedPoly.y(v - d, d, cutoff)
        raise UsageError(f"coordinate index {v} out of range for d={d}")

    # -- bookkeeping -------------------------------------------------------

    def _check_compat(self, other: "TruncatedPoly"):
        if self.d != other.d:
            raise UsageError(f"dimension mismatch: {self.d} vs {other.d}")
        if self.cutoff != other.cutoff:
            raise UsageError(f"cutoff mismatch: {self.cutoff} vs {other.cutoff}")

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, mono: Monomial) -> Fraction:
        return self.terms.get(mono, Fraction(0))

    def constant_term(self) -> Fraction:
        return self.terms.get(unit_monomial(self.d), Fraction(0))

    def depends_on_h(self) -> bool:
        return any(m.hexp > 0 for m in self.terms)

    def max_weight(self) -> int:
        return max((m.weight for m in self.terms), default=0)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())

    def truncated(self, cutoff: int) -> "TruncatedPoly":
        """Forget terms above a lower cutoff."""
        if cutoff > self.cutoff:
            raise UsageError("truncated() cannot raise the cutoff; use lifted()")
        return TruncatedPoly(self.d, cutoff, self.terms)

    def lifted(self, cutoff: int) -> "TruncatedPoly":
        """Reinterpret at a higher cutoff.

        The missing weights are taken to be zero; callers own the semantic
        choice of lift (used internally where an operation must look two
        weights past its result, e.g. bracket-by-h division).
        """
        if cutoff < self.cutoff:
            raise UsageError("lifted() cannot lower the cutoff; use truncated()")
        return TruncatedPoly(self.d, cutoff, self.terms)

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = TruncatedPoly.constant(other, self.d, self.cutoff)
        if not isinstance(other, TruncatedPoly):
            return NotImplemented
        self._check_compat(other)
        terms = dict(self.terms)
        for mono, coeff in other.terms.items():
            acc = terms.get(mono, Fraction(0)) + coeff
            if acc == 0:
                terms.pop(mono, None)
            else:
                terms[mono] = acc
        return TruncatedPoly(self.d, self.cutoff, terms)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedPoly(
            self.d, self.cutoff, {m: -c for m, c in self.terms.items()}
        )

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = TruncatedPoly.constant(other, self.d, self.cutoff)
        if not isinstance(other, TruncatedPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scaled(self, value) -> "TruncatedPoly":
        value = _as_fraction(value)
        if value == 0:
            return TruncatedPoly.zero(self.d, self.cutoff)
        return TruncatedPoly(
            self.d, self.cutoff, {m: c * value for m, c in self.terms.items()}
        )

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scaled(other)
        if not isinstance(other, TruncatedPoly):
            return NotImplemented
        self._check_compat(other)
        cutoff = self.cutoff
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            w1 = m1.weight
            for m2, c2 in other.terms.items():
                if w1 + m2.weight > cutoff:
                    continue
                m = m1.mul(m2)
                acc = out.get(m, Fraction(0)) + c1 * c2
                if acc == 0:
                    out.pop(m, None)
                else:
                    out[m] = acc
        return TruncatedPoly(self.d, cutoff, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scaled(other)
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise UsageError("exponent must be a non-negative integer")
        result = TruncatedPoly.one(self.d, self.cutoff)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, TruncatedPoly):
            return NotImplemented
        return (
            self.d == other.d
            and self.cutoff == other.cutoff
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.d, self.cutoff, frozenset(self.terms.items())))

    # -- calculus ----------------------------------------------------------

    def partial(self, v: int) -> "TruncatedPoly":
        """Formal partial derivative in coordinate v (0..d-1 x's, d..2d-1 y's).

        h is a deformation parameter, not a disc coordinate, so it is not
        differentiable here; an out-of-range index is a usage error.
        """
        if not 0 <= v < 2 * self.d:
            raise UsageError(f"coordinate index {v} out of range for d={self.d}")
        out = {}
        for mono, coeff in self.terms.items():
            if v < self.d:
                e = mono.xexp[v]
                if e == 0:
                    continue
                new = Monomial(
                    mono.xexp[:v] + (e - 1,) + mono.xexp[v + 1 :], mono.yexp, mono.hexp
                )
            else:
                i = v - self.d
                e = mono.yexp[i]
                if e == 0:
                    continue
                new = Monomial(
                    mono.xexp, mono.yexp[:i] + (e - 1,) + mono.yexp[i + 1 :], mono.hexp
                )
            out[new] = out.get(new, Fraction(0)) + coeff * e
        return TruncatedPoly(self.d, self.cutoff, out)

    def substitute(self, images: "list[TruncatedPoly]") -> "TruncatedPoly":
        """Substitute coordinate v -> images[v] for all 2d disc coordinates.

        Images must be h-free with zero constant term (origin-preserving), so
        substitution never moves weight downwards and truncation stays exact.
        h is left untouched.
        """
        if len(images) != 2 * self.d:
            raise UsageError(f"need {2 * self.d} images, got {len(images)}")
        for img in images:
            self._check_compat(img)
            if img.depends_on_h():
                raise UsageError("substitution images must be h-free")
            if img.constant_term() != 0:
                raise UsageError("substitution images must vanish at the origin")
        cutoff = self.cutoff
        one = TruncatedPoly.one(self.d, cutoff)
        hp = TruncatedPoly.h(self.d, cutoff)
        power_cache: dict[tuple[int, int], TruncatedPoly] = {}

        def power(v, e):
            key = (v, e)
            if key not in power_cache:
                if e == 0:
                    power_cache[key] = one
                else:
                    power_cache[key] = power(v, e - 1) * images[v]
            return power_cache[key]

        total = TruncatedPoly.zero(self.d, cutoff)
        for mono, coeff in self.terms.items():
            acc = one.scaled(coeff)
            for i, e in enumerate(mono.xexp):
                if e:
                    acc = acc * power(i, e)
            for i, e in enumerate(mono.yexp):
                if e:
                    acc = acc * power(self.d + i, e)
            if mono.hexp:
                acc = acc * hp ** mono.hexp
            total = total + acc
        return total

    def homogeneous_part(self, weight: int) -> "TruncatedPoly":
        return TruncatedPoly(
            self.d,
            self.cutoff,
            {m: c for m, c in self.terms.items() if m.weight == weight},
        )

    def min_weight(self):
        return min((m.weight for m in self.terms), default=None)

    # -- presentation ------------------------------------------------------

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono, coeff in self.sorted_terms():
            mono_txt = str(mono)
            if mono_txt == "1":
                text = str(coeff)
            elif coeff == 1:
                text = mono_txt
            elif coeff == -1:
                text = f"-{mono_txt}"
            else:
                text = f"{coeff}*{mono_txt}"
            parts.append(text)
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __repr__(self):
        return f"TruncatedPoly(d={self.d}, N={self.cutoff}, {self})"

    def to_json(self):
        return {
            "d": self.d,
            "N": self.cutoff,
            "terms": [
                [list(m.xexp), list(m.yexp), m.hexp, f"{c.numerator}/{c.denominator}"]
                for m, c in self.sorted_terms()
            ],
        }

    @staticmethod
    def from_json(data) -> "TruncatedPoly":
        terms = {
            Monomial(tuple(xe), tuple(ye), he): Fraction(coeff)
            for xe, ye, he, coeff in data["terms"]
        }
        return TruncatedPoly(data["d"], data["N"], terms)


def poly_add(p: TruncatedPoly, q: TruncatedPoly) -> TruncatedPoly:
    return p + q


def poly_mul(p: TruncatedPoly, q: TruncatedPoly) -> TruncatedPoly:
    return p * q


def poly_scale(p: TruncatedPoly, value) -> TruncatedPoly:
    return p.scaled(value)


def partial_derive(p: TruncatedPoly, v: int) -> TruncatedPoly:
    return p.partial(v)


# ---------------------------------------------------------------------------
# differential forms
# ---------------------------------------------------------------------------


def coordinate_name(v: int, d: int) -> str:
    return f"x{v + 1}" if v < d else f"y{v - d + 1}"


def _merge_indices(left: tuple[int, ...], right: tuple[int, ...]):
    """Concatenate strictly increasing index tuples; None if any repeats.

    Returns (sign, sorted tuple) with the sign of the merging permutation.
    """
    merged = left + right
    if len(set(merged)) != len(merged):
        return None
    arr = list(merged)
    sign = 1
    # insertion sort, counting swaps
    for i in range(1, len(arr)):
        j = i
        while j > 0 and arr[j - 1] > arr[j]:
            arr[j - 1], arr[j] = arr[j], arr[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(arr)


class DifferentialForm:
    """A degree-k form with TruncatedPoly coefficients on the 2d-disc.

    Components are keyed by strictly increasing tuples over the 2d coordinate
    1-forms (0..d-1 = dx_i, d..2d-1 = dy_i).
    """

    __slots__ = ("d", "cutoff", "degree", "components")

    def __init__(self, d: int, cutoff: int, degree: int, components=None):
        if not 0 <= degree <= 2 * d:
            raise UsageError(f"form degree {degree} out of range for d={d}")
        self.d = d
        self.cutoff = cutoff
        self.degree = degree
        clean = {}
        if components:
            for idx, poly in components.items():
                idx = tuple(idx)
                if len(idx) != degree or list(idx) != sorted(set(idx)):
                    raise UsageError(f"bad index tuple {idx} for degree {degree}")
                if any(not 0 <= v < 2 * d for v in idx):
                    raise UsageError(f"index tuple {idx} out of range for d={d}")
                if poly.d != d or poly.cutoff != cutoff:
                    raise UsageError("component truncation mismatch")
                if not poly.is_zero():
                    clean[idx] = poly
        self.components = clean

    @staticmethod
    def zero(d: int, cutoff: int, degree: int) -> "DifferentialForm":
        return DifferentialForm(d, cutoff, degree)

    @staticmethod
    def from_poly(p: TruncatedPoly) -> "DifferentialForm":
        return DifferentialForm(p.d, p.cutoff, 0, {(): p})

    @staticmethod
    def d_coordinate(v: int, d: int, cutoff: int) -> "DifferentialForm":
        """The constant 1-form dx_i (v < d) or dy_i (v >= d)."""
        if not 0 <= v < 2 * d:
            raise UsageError(f"coordinate index {v} out of range for d={d}")
        return DifferentialForm(
            d, cutoff, 1, {(v,): TruncatedPoly.one(d, cutoff)}
        )

    def _check_compat(self, other: "DifferentialForm"):
        if self.d != other.d or self.cutoff != other.cutoff:
            raise UsageError("form truncation mismatch")

    def is_zero(self) -> bool:
        return not self.components

    def component(self, idx) -> TruncatedPoly:
        return self.components.get(tuple(idx), TruncatedPoly.zero(self.d, self.cutoff))

    def __add__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        self._check_compat(other)
        if self.degree != other.degree:
            raise UsageError("cannot add forms of different degree")
        comps = dict(self.components)
        for idx, poly in other.components.items():
            acc = comps.get(idx)
            comps[idx] = poly if acc is None else acc + poly
        return DifferentialForm(self.d, self.cutoff, self.degree, comps)

    def __neg__(self):
        return DifferentialForm(
            self.d,
            self.cutoff,
            self.degree,
            {idx: -poly for idx, poly in self.components.items()},
        )

    def __sub__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        return self + (-other)

    def scaled(self, value) -> "DifferentialForm":
        return DifferentialForm(
            self.d,
            self.cutoff,
            self.degree,
            {idx: poly.scaled(value) for idx, poly in self.components.items()},
        )

    def poly_mul(self, p: TruncatedPoly) -> "DifferentialForm":
        return DifferentialForm(
            self.d,
            self.cutoff,
            self.degree,
            {idx: poly * p for idx, poly in self.components.items()},
        )

    def __eq__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        return (
            self.d == other.d
            and self.cutoff == other.cutoff
            and self.degree == other.degree
            and self.components == other.components
        )

    def __hash__(self):
        return hash(
            (self.d, self.cutoff, self.degree, frozenset(self.components.items()))
        )

    def __str__(self):
        if not self.components:
            return "0"
        parts = []
        for idx in sorted(self.components):
            basis = "/\\".join(f"d{coordinate_name(v, self.d)}" for v in idx)
            poly = self.components[idx]
            if self.degree == 0:
                parts.append(str(poly))
            else:
                parts.append(f"({poly}) {basis}")
        return " + ".join(parts)

    def __repr__(self):
        return f"DifferentialForm(d={self.d}, N={self.cutoff}, deg={self.degree}, {self})"

    def to_json(self):
        return {
            "d": self.d,
            "N": self.cutoff,
            "degree": self.degree,
            "components": {
                ",".join(map(str, idx)): poly.to_json()["terms"]
                for idx, poly in sorted(self.components.items())
            },
        }


def de_rham_d(form: DifferentialForm) -> DifferentialForm:
    """Exterior derivative; satisfies d(d(form)) = 0 exactly."""
    if form.degree >= 2 * form.d:
        raise UsageError("de Rham differential undefined above top degree")
    comps: dict[tuple[int, ...], TruncatedPoly] = {}
    for idx, poly in form.components.items():
        for v in range(2 * form.d):
            dpoly = poly.partial(v)
            if dpoly.is_zero():
                continue
            merged = _merge_indices((v,), idx)
            if merged is None:
                continue
            sign, new_idx = merged
            piece = dpoly if sign == 1 else -dpoly
            acc = comps.get(new_idx)
            comps[new_idx] = piece if acc is None else acc + piece
    return DifferentialForm(form.d, form.cutoff, form.degree + 1, comps)


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    """Exterior product; graded-commutative and associative."""
    a._check_compat(b)
    degree = a.degree + b.degree
    if degree > 2 * a.d:
        raise UsageError("wedge degree overflow")
    comps: dict[tuple[int, ...], TruncatedPoly] = {}
    for ia, pa in a.components.items():
        for ib, pb in b.components.items():
            merged = _merge_indices(ia, ib)
            if merged is None:
                continue
            sign, idx = merged
            piece = pa * pb
            if sign == -1:
                piece = -piece
            if piece.is_zero():
                continue
            acc = comps.get(idx)
            comps[idx] = piece if acc is None else acc + piece
    return DifferentialForm(a.d, a.cutoff, degree, comps)


def euler_contraction(form: DifferentialForm) -> DifferentialForm:
    """Interior product with the Euler field sum_v u_v d/du_v."""
    if form.degree == 0:
        raise UsageError("cannot contract a 0-form")
    comps: dict[tuple[int, ...], TruncatedPoly] = {}
    for idx, poly in form.components.items():
        for pos, v in enumerate(idx):
            rest = idx[:pos] + idx[pos + 1 :]
            piece = poly * TruncatedPoly.coordinate(v, form.d, form.cutoff)
            if pos % 2 == 1:
                piece = -piece
            if piece.is_zero():
                continue
            acc = comps.get(rest)
            comps[rest] = piece if acc is None else acc + piece
    return DifferentialForm(form.d, form.cutoff, form.degree - 1, comps)


# ---------------------------------------------------------------------------
# Poisson structures
# ---------------------------------------------------------------------------


class PoissonBivector:
    """Antisymmetric 2d x 2d matrix of coefficients Theta_{uv}.

    The bracket convention is {f, g} = sum_{u,v} Theta_{uv} d_u f d_v g, and
    the standard bivector is normalized so {x_i, y_j} = delta_ij, matching
    the Weyl commutator [x_i, y_j] = delta_ij h.
    """

    __slots__ = ("d", "cutoff", "entries")

    def __init__(self, d: int, cutoff: int, upper=None):
        self.d = d
        self.cutoff = cutoff
        clean = {}
        if upper:
            for (i, j), poly in upper.items():
                if not 0 <= i < j < 2 * d:
                    raise UsageError(f"bivector indices ({i},{j}) must satisfy i<j")
                if poly.d != d or poly.cutoff != cutoff:
                    raise UsageError("bivector entry truncation mismatch")
                if not poly.is_zero():
                    clean[(i, j)] = poly
        self.entries = clean

    @staticmethod
    def standard(d: int, cutoff: int) -> "PoissonBivector":
        one = TruncatedPoly.one(d, cutoff)
        return PoissonBivector(d, cutoff, {(i, d + i): one for i in range(d)})

    @staticmethod
    def from_matrix(matrix, d: int, cutoff: int) -> "PoissonBivector":
        """Validate a full 2d x 2d matrix of polys as antisymmetric."""
        n = 2 * d
        if len(matrix) != n or any(len(row) != n for row in matrix):
            raise UsageError("bivector matrix must be 2d x 2d")
        upper = {}
        for i in range(n):
            if not matrix[i][i].is_zero():
                raise UsageError(f"bivector diagonal entry ({i},{i}) nonzero")
            for j in range(i + 1, n):
                if matrix[i][j] != -matrix[j][i]:
                    raise UsageError(f"bivector not antisymmetric at ({i},{j})")
                upper[(i, j)] = matrix[i][j]
        return PoissonBivector(d, cutoff, upper)

    def entry(self, i: int, j: int) -> TruncatedPoly:
        if i == j:
            return TruncatedPoly.zero(self.d, self.cutoff)
        if i < j:
            return self.entries.get((i, j), TruncatedPoly.zero(self.d, self.cutoff))
        return -self.entries.get((j, i), TruncatedPoly.zero(self.d, self.cutoff))

    def __eq__(self, other):
        if not isinstance(other, PoissonBivector):
            return NotImplemented
        return (
            self.d == other.d
            and self.cutoff == other.cutoff
            and self.entries == other.entries
        )


def poisson_bracket(
    f: TruncatedPoly, g: TruncatedPoly, theta: PoissonBivector
) -> TruncatedPoly:
    """{f, g} = sum Theta_uv d_u f d_v g for h-free functions on the disc."""
    f._check_compat(g)
    if f.d != theta.d or f.cutoff != theta.cutoff:
        raise UsageError("bivector truncation mismatch")
    if f.depends_on_h() or g.depends_on_h():
        raise UsageError("poisson_bracket inputs must be h-free")
    out = TruncatedPoly.zero(f.d, f.cutoff)
    for (i, j), poly in theta.entries.items():
        term = poly * (f.partial(i) * g.partial(j) - f.partial(j) * g.partial(i))
        out = out + term
    return out


def standard_poisson(f: TruncatedPoly, g: TruncatedPoly) -> TruncatedPoly:
    """{f, g} for the constant standard bivector, computed directly."""
    f._check_compat(g)
    if f.depends_on_h() or g.depends_on_h():
        raise UsageError("standard_poisson inputs must be h-free")
    d = f.d
    out = TruncatedPoly.zero(d, f.cutoff)
    for i in range(d):
        out = out + (f.partial(i) * g.partial(d + i) - f.partial(d + i) * g.partial(i))
    return out


def all_monomials(d: int, max_degree: int, min_degree: int = 0):
    """All h-free monomials in 2d variables with degree in the given range."""
    result = []
    for total in range(min_degree, max_degree + 1):
        for exps in _compositions(total, 2 * d):
            result.append(Monomial(tuple(exps[:d]), tuple(exps[d:]), 0))
    return result


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest

"""Chevalley-Eilenberg cochains of graded Lie algebras with module coefficients.

The differential preserves the total weight of a cochain (inputs minus
output), so every computation here is blocked by degree and weight: each
(k, w) block is an independent finite matrix over Q, and ranks are exact.
Tuples whose brackets or actions overflow a cutoff are excluded from sweeps
and counted, never silently truncated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from . import linalg
from .errors import CheckFailure, UsageError
from .liealg import (
    ExtensionData,
    GradedLieAlgebra,
    Vector,
    extension_defect_cochain,
    vec_add,
    vec_scale,
    vec_sub,
)


@dataclass
class LieModule:
    """A finite module over a GradedLieAlgebra, given by action constants.

    action[(i, m)] is the vector rho(e_i) @ v_m in module coordinates; absent
    keys act by zero.  The module carries its own weight cutoff; actions that
    would land above it must not be stored.
    """

    algebra: GradedLieAlgebra
    name: str
    labels: tuple[str, ...]
    weights: tuple[int, ...]
    action: dict[tuple[int, int], Vector]
    cutoff: int

    def __post_init__(self):
        self._index = {label: k for k, label in enumerate(self.labels)}

    @property
    def dim(self) -> int:
        return len(self.labels)

    def act(self, i: int, vec: Vector) -> Vector:
        out: Vector = {}
        for m, c in vec.items():
            for k, a in self.action.get((i, m), {}).items():
                acc = out.get(k, Fraction(0)) + c * a
                if acc == 0:
                    out.pop(k, None)
                else:
                    out[k] = acc
        return out

    def module_indices_of_weight(self, w: int):
        return [m for m, wm in enumerate(self.weights) if wm == w]

    def in_cutoff_act(self, i: int, m: int) -> bool:
        return self.algebra.weights[i] + self.weights[m] <= self.cutoff

    def verify_representation(self):
        """rho([x,y]) = [rho(x), rho(y)] wherever no weight overflows.

        Returns the number of exempt triples (algebra pair, module vector).
        """
        g = self.algebra
        exempt = 0
        for i in range(g.dim):
            for j in range(i + 1, g.dim):
                pair_ok = g.in_cutoff_pair(i, j)
                bracket = g.bracket(i, j) if pair_ok else None
                for m in range(self.dim):
                    if (
                        not pair_ok
                        or not self.in_cutoff_act(j, m)
                        or not self.in_cutoff_act(i, m)
                        or g.weights[i] + g.weights[j] + self.weights[m] > self.cutoff
                    ):
                        exempt += 1
                        continue
                    via_bracket: Vector = {}
                    for k, c in bracket.items():
                        via_bracket = vec_add(
                            via_bracket, vec_scale(self.act(k, {m: Fraction(1)}), c)
                        )
                    direct = vec_sub(
                        self.act(i, self.act(j, {m: Fraction(1)})),
                        self.act(j, self.act(i, {m: Fraction(1)})),
                    )
                    if via_bracket != direct:
                        raise CheckFailure(
                            f"{self.name}: not a representation on "
                            f"({self.algebra.labels[i]}, {self.algebra.labels[j]}, "
                            f"{self.labels[m]})",
                            witness={"pair": (i, j), "module_index": m},
                        )
        return exempt


def trivial_module(algebra: GradedLieAlgebra, labels=("1",), weights=(0,), name="k"):
    cutoff = max(weights) if weights else 0
    return LieModule(algebra, name, tuple(labels), tuple(weights), {}, cutoff)


@dataclass
class Cochain:
    """A k-cochain: alternating map on basis tuples with module values.

    values maps strictly increasing index tuples to module vectors; absent
    tuples are zero.  excluded counts input tuples a producing computation
    had to skip for weight overflow.
    """

    module: LieModule
    degree: int
    values: dict[tuple, Vector] = field(default_factory=dict)
    excluded: int = 0

    def value(self, idx: tuple) -> Vector:
        return self.values.get(idx, {})

    def is_zero(self) -> bool:
        return not any(self.values.values())

    def support_weights(self):
        """Cochain weight of each supported tuple: sum(inputs) - output."""
        g = self.module.algebra
        out = set()
        for idx, vec in self.values.items():
            ins = sum(g.weights[i] for i in idx)
            for m, c in vec.items():
                if c != 0:
                    out.add(ins - self.module.weights[m])
        return sorted(out)

    def __add__(self, other: "Cochain") -> "Cochain":
        if self.module is not other.module or self.degree != other.degree:
            raise UsageError("cochain mismatch")
        values = {k: dict(v) for k, v in self.values.items()}
        for idx, vec in other.values.items():
            acc = vec_add(values.get(idx, {}), vec)
            if acc:
                values[idx] = acc
            else:
                values.pop(idx, None)
        return Cochain(self.module, self.degree, values, self.excluded + other.excluded)

    def __sub__(self, other: "Cochain") -> "Cochain":
        return self + other.scaled(Fraction(-1))

    def scaled(self, value) -> "Cochain":
        return Cochain(
            self.module,
            self.degree,
            {idx: vec_scale(vec, value) for idx, vec in self.values.items()},
            self.excluded,
        )

    def __eq__(self, other):
        if not isinstance(other, Cochain):
            return NotImplemented
        clean_self = {k: v for k, v in self.values.items() if v}
        clean_other = {k: v for k, v in other.values.items() if v}
        return (
            self.module is other.module
            and self.degree == other.degree
            and clean_self == clean_other
        )


def ce_differential(cochain: Cochain, module: LieModule | None = None) -> Cochain:
    """The standard CE differential with both action and bracket terms.

    (d c)(x_0..x_k) = sum_i (-1)^i rho(x_i) c(..x_i^..)
                    + sum_{i<j} (-1)^{i+j} c([x_i,x_j], ..x_i^..x_j^..)

    A tuple containing a bracket pair that overflows the algebra cutoff is
    excluded (and counted) only when the unknown bracket could actually meet
    the cochain's support; where the cochain provably vanishes at that input
    weight, the missing bracket contributes nothing and the tuple is kept.
    """
    module = module or cochain.module
    g = module.algebra
    k = cochain.degree
    support = set(cochain.support_weights())
    reachable_totals = {s + mw for s in support for mw in set(module.weights)}
    values: dict[tuple, Vector] = {}
    excluded = 0
    for idx in combinations(range(g.dim), k + 1):
        total = sum(g.weights[i] for i in idx)
        overflow = False
        acc: Vector = {}
        for a in range(k + 1):
            rest = idx[:a] + idx[a + 1 :]
            inner = cochain.value(rest)
            if inner:
                term = module.act(idx[a], inner)
                if a % 2 == 1:
                    term = vec_scale(term, Fraction(-1))
                acc = vec_add(acc, term)
        for a in range(k + 1):
            for b in range(a + 1, k + 1):
                if not g.in_cutoff_pair(idx[a], idx[b]):
                    # the inserted evaluation would see inputs of weight
                    # `total`; harmless unless the cochain lives there
                    if total in reachable_totals:
                        overflow = True
                        break
                    continue
                bracket = g.bracket(idx[a], idx[b])
                if not bracket:
                    continue
                rest = tuple(v for t, v in enumerate(idx) if t != a and t != b)
                sign = Fraction(-1) ** (a + b)
                for comp, c in bracket.items():
                    evaluated = _evaluate_inserted(cochain, comp, rest)
                    if evaluated:
                        acc = vec_add(acc, vec_scale(evaluated, sign * c))
            if overflow:
                break
        if overflow:
            excluded += 1
            continue
        if acc:
            values[idx] = acc
    return Cochain(module, k + 1, values, excluded)


def _evaluate_inserted(cochain: Cochain, comp: int, rest: tuple) -> Vector:
    """c(e_comp, rest...) with alternating reordering into increasing order."""
    if comp in rest:
        return {}
    pos = 0
    while pos < len(rest) and rest[pos] < comp:
        pos += 1
    idx = rest[:pos] + (comp,) + rest[pos:]
    vec = cochain.value(idx)
    if not vec:
        return {}
    # moving comp from slot 0 to slot pos costs pos transpositions
    return vec_scale(vec, Fraction(-1) ** pos) if pos % 2 else vec


def cochain_block_basis(module: LieModule, k: int, weight: int):
    """Basis of the (degree k, cochain weight w) block as (tuple, m) pairs."""
    g = module.algebra
    out = []
    for idx in combinations(range(g.dim), k):
        ins = sum(g.weights[i] for i in idx)
        for m in range(module.dim):
            if ins - module.weights[m] == weight:
                out.append((idx, m))
    return out


def differential_block(module: LieModule, k: int, weight: int):
    """Matrix of the CE differential C^k(w) -> C^{k+1}(w).

    Built in a single pass over the target tuples: each target tuple's CE
    formula names exactly the source basis elements it reads, so the block
    costs O(#target tuples) rather than one full differential per column.
    Target tuples containing an over-cutoff bracket pair that could meet the
    block are dropped and counted.  Returns (matrix with rows indexed by the
    target basis, source basis, target basis, excluded tuple count).
    """
    g = module.algebra
    src = cochain_block_basis(module, k, weight)
    tgt = cochain_block_basis(module, k + 1, weight)
    src_pos = {key: c for c, key in enumerate(src)}
    tgt_pos = {key: r for r, key in enumerate(tgt)}
    matrix = [[Fraction(0)] * len(src) for _ in tgt]
    module_weights = set(module.weights)
    tuples_in_block: dict[tuple, list] = {}
    for idx, m in tgt:
        tuples_in_block.setdefault(idx, []).append(m)
    excluded = 0
    for idx, ms in tuples_in_block.items():
        overflow = False
        for a in range(k + 1):
            for b in range(a + 1, k + 1):
                if not g.in_cutoff_pair(idx[a], idx[b]):
                    # unknown bracket could meet this block only if some
                    # module weight matches the tuple total minus the block
                    total = sum(g.weights[i] for i in idx)
                    if (total - weight) in module_weights:
                        overflow = True
                        break
            if overflow:
                break
        if overflow:
            excluded += 1
            continue

        def add(row_key, col_key, value):
            row = tgt_pos.get(row_key)
            col = src_pos.get(col_key)
            if row is not None and col is not None and value != 0:
                matrix[row][col] += value

        for a in range(k + 1):
            rest = idx[:a] + idx[a + 1 :]
            rest_total = sum(g.weights[i] for i in rest)
            sign = Fraction(-1) ** a
            for m_src in module.module_indices_of_weight(rest_total - weight):
                acted = module.act(idx[a], {m_src: Fraction(1)})
                for m_out, c in acted.items():
                    add((idx, m_out), (rest, m_src), sign * c)
        for a in range(k + 1):
            for b in range(a + 1, k + 1):
                bracket = g.bracket(idx[a], idx[b])
                if not bracket:
                    continue
                rest = tuple(v for t, v in enumerate(idx) if t != a and t != b)
                sign = Fraction(-1) ** (a + b)
                for comp, cb in bracket.items():
                    if comp in rest:
                        continue
                    pos = 0
                    while pos < len(rest) and rest[pos] < comp:
                        pos += 1
                    inserted = rest[:pos] + (comp,) + rest[pos:]
                    parity = Fraction(-1) ** pos
                    for m in ms:
                        add((idx, m), (inserted, m), sign * parity * cb)
    return matrix, src, tgt, excluded


@dataclass
class CochainSpace:
    """One (degree, weight) block of the complex with its outgoing matrix."""

    module: LieModule
    degree: int
    weight: int
    basis: list
    matrix: list  # rows indexed by the (degree+1, weight) block
    excluded: int

    @staticmethod
    def build(module: LieModule, degree: int, weight: int) -> "CochainSpace":
        matrix, src, _, excluded = differential_block(module, degree, weight)
        return CochainSpace(module, degree, weight, src, matrix, excluded)

    def verify_d_squared(self):
        """d_{k+1} d_k = 0 as matrices; meaningful when nothing overflowed."""
        following = CochainSpace.build(self.module, self.degree + 1, self.weight)
        product = linalg.mat_mul(following.matrix, self.matrix)
        if any(v != 0 for row in product for v in row):
            raise CheckFailure(
                f"d^2 != 0 on block (k={self.degree}, w={self.weight})",
                witness={"degree": self.degree, "weight": self.weight},
            )
        return following


def cohomology_dim(module: LieModule, k: int, weight: int) -> int:
    """dim H^k at one cochain weight, by exact rank-nullity."""
    d_k, src_k, _, _ = differential_block(module, k, weight)
    dim_ck = len(src_k)
    rank_k = linalg.rank(d_k)
    if k == 0:
        rank_prev = 0
    else:
        d_prev, _, _, _ = differential_block(module, k - 1, weight)
        rank_prev = linalg.rank(d_prev) if d_prev else 0
    return dim_ck - rank_k - rank_prev


def is_cocycle(cochain: Cochain) -> bool:
    return ce_differential(cochain).is_zero()


def is_coboundary(cochain: Cochain):
    """Exact solve for a primitive, weight block by weight block.

    Returns (True, primitive Cochain) or (False, None).  The input must be a
    cocycle; anything else is a usage error.
    """
    if not is_cocycle(cochain):
        raise UsageError("is_coboundary input is not a cocycle")
    module = cochain.module
    k = cochain.degree
    if k == 0:
        return (cochain.is_zero(), Cochain(module, 0) if cochain.is_zero() else None)
    primitive_values: dict[tuple, Vector] = {}
    for w in cochain.support_weights():
        matrix, src, tgt, _ = differential_block(module, k - 1, w)
        tgt_pos = {key: r for r, key in enumerate(tgt)}
        rhs = [Fraction(0)] * len(tgt)
        for idx, vec in cochain.values.items():
            ins = sum(module.algebra.weights[i] for i in idx)
            for m, c in vec.items():
                if ins - module.weights[m] == w:
                    rhs[tgt_pos[(idx, m)]] = c
        if not src:
            if any(rhs):
                return (False, None)
            continue
        sol = linalg.solve(matrix, rhs)
        if sol is None:
            return (False, None)
        for (idx, m), c in zip(src, sol):
            if c != 0:
                vec = primitive_values.setdefault(idx, {})
                vec[m] = vec.get(m, Fraction(0)) + c
    primitive = Cochain(module, k - 1, primitive_values)
    return (True, primitive)


@dataclass
class CohomologyClass:
    degree: int
    weight: int
    representative: Cochain

    def is_nonzero(self) -> bool:
        found, _ = is_coboundary(self.representative)
        return not found


# ---------------------------------------------------------------------------
# cochains and modules out of extensions
# ---------------------------------------------------------------------------


def module_from_extension(e: ExtensionData, name=None) -> LieModule:
    """The quotient-action module carried by an abelian kernel.

    rho(xi) v = [splitting(xi), inject(v)] read back in sub coordinates;
    independence of the splitting holds because the kernel is abelian, which
    is verified here.
    """
    e.check_sub_abelian()
    action: dict[tuple[int, int], Vector] = {}
    for i in range(e.quotient.dim):
        lifted = e.splitting.column(i)
        for m in range(e.sub.dim):
            bracket = e.total.bracket_vec(lifted, e.inject.column(m))
            if bracket:
                action[(i, m)] = e.sub_coordinates(bracket)
    cutoff = max(e.sub.weights) if e.sub.weights else 0
    module = LieModule(
        e.quotient,
        name or f"{e.sub.name} as {e.quotient.name}-module",
        e.sub.labels,
        e.sub.weights,
        action,
        cutoff,
    )
    return module


def extension_cocycle(e: ExtensionData, module: LieModule | None = None) -> Cochain:
    """The CE 2-cocycle of an extension with abelian kernel.

    c(xi, eta) = [s(xi), s(eta)] - s([xi, eta]) in sub coordinates, verified
    to satisfy the cocycle identity for the quotient action on the kernel.
    """
    module = module or module_from_extension(e)
    raw = extension_defect_cochain(e)
    cochain = Cochain(module, 2, raw)
    boundary = ce_differential(cochain, module)
    if not boundary.is_zero():
        bad = next(idx for idx, vec in boundary.values.items() if vec)
        raise CheckFailure(
            f"extension defect of {e.total.name} is not a cocycle",
            witness={"triple": bad, "value": boundary.values[bad]},
        )
    return cochain


def omega_class(d: int, n: int) -> CohomologyClass:
    """The class of the standard symplectic form on Hamiltonian fields.

    Built from the central extension 0 -> constants -> functions -> H -> 0
    with the nonconstant-monomial splitting: the resulting 2-cocycle sends a
    pair of Hamiltonians to the constant term of their Poisson bracket.  It
    is supported on pairs of degree-1 symbols, is weight-homogeneous of
    cochain weight -2, and is not a coboundary.
    """
    from .liealg import GradedLieAlgebra, LieMap, LinearMap
    from .tower import build_a_poisson, build_h

    if n < 2:
        raise UsageError("omega_class needs cutoff >= 2")
    a_alg = build_a_poisson(d, n)
    h_alg = build_h(d, n)
    constants = GradedLieAlgebra(
        "k", ("1",), (-2,), {}, a_alg.cutoff, (a_alg.tags[0],)
    )
    a_index = {m: k for k, m in enumerate(a_alg.tags)}
    inject = LieMap.build(
        constants, a_alg, {0: {a_index[constants.tags[0]]: Fraction(1)}}, name="k->A"
    )
    project = LieMap.build(
        a_alg,
        h_alg,
        {
            i: ({h_alg.index(str(m)): Fraction(1)} if _nonconstant(m) else {})
            for i, m in enumerate(a_alg.tags)
        },
        name="A->H",
    )
    splitting = LinearMap(
        h_alg,
        a_alg,
        {i: {a_index[m]: Fraction(1)} for i, m in enumerate(h_alg.tags)},
    )
    extension = ExtensionData(constants, a_alg, h_alg, inject, project, splitting)
    extension.check_exact()
    extension.check_sub_central()
    module = trivial_module(h_alg, labels=("1",), weights=(0,), name="k")
    cochain = extension_cocycle(extension, module)
    return CohomologyClass(2, -2, cochain)


def _nonconstant(mono) -> bool:
    return any(mono.xexp) or any(mono.yexp)

"""The derivation and extension tower of the truncated Weyl algebra.

Levels are realized through almost-inner representatives: the level-q bracket
algebra has basis h^-1 m for normal-ordered monomials m with h-order <= q,
with bracket [h^-1 a, h^-1 b] = h^-1([a, b]/h) computed in the Weyl algebra
one h-order deeper.  The derivation quotients drop the central scalars
h^-1 k[h].  Weights are monomial weight minus 2, so every map in the tower is
weight-preserving and every bracket is graded.

Builders verify gradedness at construction (antisymmetry is structural) and
every produced map is checked bracket-preserving; the exhaustive in-cutoff
Jacobi sweeps run inside `commu_diagram_check`, which assembles the
two-level ladder of extensions and checks its exactness, centrality, kernel
identification and square commutativity weight by weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import cohomology
from .errors import CheckFailure, InternalError
from .liealg import (
    ExtensionData,
    GradedLieAlgebra,
    LieMap,
    LinearMap,
    Vector,
    vec_add,
    vec_scale,
)
from .reports import Report
from .series import Monomial, TruncatedPoly, all_monomials, standard_poisson
from .weyl import TruncationSpec, WeylElement, commutator, mixed_laplacian

_build_cache: dict = {}


def _is_scalar(m: Monomial) -> bool:
    return not any(m.xexp) and not any(m.yexp)


def _level_monomials(d: int, h_max: int, n: int, include_scalars: bool):
    out = []
    for c in range(h_max + 1):
        if 2 * c > n:
            break
        for m in all_monomials(d, n - 2 * c):
            mono = Monomial(m.xexp, m.yexp, c)
            if not include_scalars and _is_scalar(mono):
                continue
            out.append(mono)
    out.sort(key=lambda m: m.sort_key())
    return out


def _transported_bracket(m1: Monomial, m2: Monomial, d: int, q: int):
    """[h^-1 m1, h^-1 m2] = h^-1([m1, m2]/h) as a monomial -> coefficient map.

    Exact: the Weyl commutator is computed at h-order q+1 and full weight
    w1 + w2, then divided by h.
    """
    w = m1.weight + m2.weight
    spec = TruncationSpec(d, q + 1, w)
    a = WeylElement(spec, {m1: Fraction(1)})
    b = WeylElement(spec, {m2: Fraction(1)})
    comm = commutator(a, b)
    out = {}
    for mono, coeff in comm.terms.items():
        if mono.hexp < 1:
            raise InternalError("Weyl commutator not divisible by h")
        out[Monomial(mono.xexp, mono.yexp, mono.hexp - 1)] = coeff
    return out


def _build_level(d: int, q: int, n: int, drop_scalars: bool, name: str):
    monos = _level_monomials(d, q, n, include_scalars=not drop_scalars)
    index = {m: k for k, m in enumerate(monos)}
    labels = tuple(f"h^-1*{m}" for m in monos)
    weights = tuple(m.weight - 2 for m in monos)
    cutoff = n - 2
    brackets = {}
    for i, mi in enumerate(monos):
        for j in range(i + 1, len(monos)):
            mj = monos[j]
            if mi.weight + mj.weight - 4 > cutoff:
                continue  # graded: everything would be truncated anyway
            raw = _transported_bracket(mi, mj, d, q)
            vec = {}
            for mono, coeff in raw.items():
                if drop_scalars and _is_scalar(mono):
                    continue
                if mono.hexp > q or mono.weight > n:
                    continue
                pos = index.get(mono)
                if pos is None:
                    raise InternalError(f"bracket left the level basis: {mono}")
                vec[pos] = coeff
            if vec:
                brackets[(i, j)] = vec
    algebra = GradedLieAlgebra(name, labels, weights, brackets, cutoff, tuple(monos))
    algebra.verify_graded()
    return algebra


def build_g_level(d: int, q: int, n: int) -> GradedLieAlgebra:
    """The level-q central-extension algebra: h^-1 D mod h^q D, truncated.

    The indexing is pinned by two requirements: the scalar subalgebra of
    level q is k[h]/h^(q+1) (spanned by h^-1 h^c, c <= q), and the kernel of
    the quotient to level q-1 is a shifted copy of the function space.  Both
    are verified by commu_diagram_check.
    """
    key = ("G", d, q, n)
    if key not in _build_cache:
        _build_cache[key] = _build_level(d, q, n, False, f"G_{q}(d={d},N={n})")
    return _build_cache[key]


def build_derd_level(d: int, q: int, n: int) -> GradedLieAlgebra:
    """The level-q derivation algebra: the same quotient modulo scalars."""
    key = ("DerD", d, q, n)
    if key not in _build_cache:
        _build_cache[key] = _build_level(d, q, n, True, f"DerD_{q}(d={d},N={n})")
    return _build_cache[key]


def build_scalars(d: int, q: int, n: int) -> GradedLieAlgebra:
    """The abelian scalar algebra k[h]/h^(q+1), embedded as h^-1 h^c."""
    monos = [
        Monomial((0,) * d, (0,) * d, c) for c in range(q + 1) if 2 * c <= n
    ]
    return GradedLieAlgebra(
        f"k[h]/h^{q + 1}",
        tuple(f"h^-1*{m}" for m in monos),
        tuple(m.weight - 2 for m in monos),
        {},
        n - 2,
        tuple(monos),
    )


def build_h(d: int, n: int) -> GradedLieAlgebra:
    """Hamiltonian fields as functions modulo constants under Poisson bracket."""
    key = ("H", d, n)
    if key in _build_cache:
        return _build_cache[key]
    monos = sorted(all_monomials(d, n, min_degree=1), key=lambda m: m.sort_key())
    index = {m: k for k, m in enumerate(monos)}
    cutoff = n - 2
    brackets = {}
    for i, mi in enumerate(monos):
        pi = TruncatedPoly(d, n, {mi: Fraction(1)})
        for j in range(i + 1, len(monos)):
            mj = monos[j]
            if mi.weight + mj.weight - 4 > cutoff:
                continue
            pb = standard_poisson(pi, TruncatedPoly(d, n, {mj: Fraction(1)}))
            vec = {
                index[m]: c
                for m, c in pb.terms.items()
                if not _is_scalar(m) and m.weight <= n
            }
            if vec:
                brackets[(i, j)] = vec
    algebra = GradedLieAlgebra(
        f"H(d={d},N={n})",
        tuple(str(m) for m in monos),
        tuple(m.weight - 2 for m in monos),
        brackets,
        cutoff,
        tuple(monos),
    )
    algebra.verify_graded()
    _build_cache[key] = algebra
    return algebra


def build_a_poisson(d: int, n: int) -> GradedLieAlgebra:
    """Functions on the disc under the Poisson bracket, constants included."""
    key = ("A", d, n)
    if key in _build_cache:
        return _build_cache[key]
    monos = sorted(all_monomials(d, n), key=lambda m: m.sort_key())
    index = {m: k for k, m in enumerate(monos)}
    cutoff = n - 2
    brackets = {}
    for i, mi in enumerate(monos):
        pi = TruncatedPoly(d, n, {mi: Fraction(1)})
        for j in range(i + 1, len(monos)):
            mj = monos[j]
            if mi.weight + mj.weight - 4 > cutoff:
                continue
            pb = standard_poisson(pi, TruncatedPoly(d, n, {mj: Fraction(1)}))
            vec = {index[m]: c for m, c in pb.terms.items() if m.weight <= n}
            if vec:
                brackets[(i, j)] = vec
    algebra = GradedLieAlgebra(
        f"A(d={d},N={n})",
        tuple(str(m) for m in monos),
        tuple(m.weight - 2 for m in monos),
        brackets,
        cutoff,
        tuple(monos),
    )
    algebra.verify_graded()
    _build_cache[key] = algebra
    return algebra


def build_w(d: int, n: int) -> GradedLieAlgebra:
    """All vector fields sum f_v d_v with polynomial coefficients."""
    key = ("W", d, n)
    if key in _build_cache:
        return _build_cache[key]
    coeff_monos = sorted(all_monomials(d, n), key=lambda m: m.sort_key())
    basis = [(v, m) for m in coeff_monos for v in range(2 * d)]
    basis.sort(key=lambda t: (t[1].weight, t[0], t[1].sort_key()))
    index = {t: k for k, t in enumerate(basis)}
    labels = tuple(
        f"{m}*d/d{_coord_name(v, d)}" if str(m) != "1" else f"d/d{_coord_name(v, d)}"
        for v, m in basis
    )
    weights = tuple(m.weight - 1 for v, m in basis)
    cutoff = n - 1
    brackets = {}
    for i, (u, mi) in enumerate(basis):
        fi = TruncatedPoly(d, n, {mi: Fraction(1)})
        for j in range(i + 1, len(basis)):
            v, mj = basis[j]
            if mi.weight + mj.weight - 2 > cutoff:
                continue
            fj = TruncatedPoly(d, n, {mj: Fraction(1)})
            vec: Vector = {}
            for mono, c in (fi * fj.partial(u)).terms.items():
                pos = index.get((v, mono))
                if pos is not None:
                    vec[pos] = vec.get(pos, Fraction(0)) + c
            for mono, c in (fj * fi.partial(v)).terms.items():
                pos = index.get((u, mono))
                if pos is not None:
                    vec[pos] = vec.get(pos, Fraction(0)) - c
            vec = {k: c for k, c in vec.items() if c != 0}
            if vec:
                brackets[(i, j)] = vec
    algebra = GradedLieAlgebra(
        f"W(d={d},N={n})", labels, weights, brackets, cutoff, tuple(basis)
    )
    algebra.verify_graded()
    _build_cache[key] = algebra
    return algebra


def _coord_name(v: int, d: int) -> str:
    return f"x{v + 1}" if v < d else f"y{v - d + 1}"


def hamiltonian_map(d: int, n: int) -> LieMap:
    """The injective map H -> W sending f to sum dx_i f d_y_i - dy_i f d_x_i."""
    h_alg = build_h(d, n)
    w_alg = build_w(d, n)
    w_index = {t: k for k, t in enumerate(w_alg.tags)}
    columns = {}
    for i, mono in enumerate(h_alg.tags):
        f = TruncatedPoly(d, n, {mono: Fraction(1)})
        vec: Vector = {}
        for axis in range(d):
            for m, c in f.partial(axis).terms.items():
                pos = w_index[(d + axis, m)]
                vec[pos] = vec.get(pos, Fraction(0)) + c
            for m, c in f.partial(d + axis).terms.items():
                pos = w_index[(axis, m)]
                vec[pos] = vec.get(pos, Fraction(0)) - c
        columns[i] = {k: c for k, c in vec.items() if c != 0}
    return LieMap.build(h_alg, w_alg, columns, name="H->W")


# ---------------------------------------------------------------------------
# the maps and extensions of the tower
# ---------------------------------------------------------------------------


def _aligned_columns(source: GradedLieAlgebra, target: GradedLieAlgebra, transform):
    index = {m: k for k, m in enumerate(target.tags)}
    columns = {}
    for i, mono in enumerate(source.tags):
        image = transform(mono)
        if image is None:
            columns[i] = {}
        else:
            columns[i] = {index[image]: Fraction(1)}
    return columns


def level_quotient_map(
    d: int, q: int, n: int, kind: str
) -> LieMap:
    """The quotient map from level q+1 to level q (drop h-order q+1 terms)."""
    build = build_g_level if kind == "G" else build_derd_level
    upper, lower = build(d, q + 1, n), build(d, q, n)
    columns = _aligned_columns(upper, lower, lambda m: m if m.hexp <= q else None)
    return LieMap.build(upper, lower, columns, name=f"{upper.name}->{lower.name}")


def cent_row(d: int, q: int, n: int) -> ExtensionData:
    """0 -> k[h]/h^(q+1) -> G_q -> DerD_q -> 0 with the monomial splitting."""
    g = build_g_level(d, q, n)
    derd = build_derd_level(d, q, n)
    scalars = build_scalars(d, q, n)
    inject = LieMap.build(
        scalars, g, _aligned_columns(scalars, g, lambda m: m), name=f"k[h]->{g.name}"
    )
    project = LieMap.build(
        g,
        derd,
        _aligned_columns(g, derd, lambda m: None if _is_scalar(m) else m),
        name=f"{g.name}->{derd.name}",
    )
    splitting = LinearMap(derd, g, _aligned_columns(derd, g, lambda m: m))
    return ExtensionData(scalars, g, derd, inject, project, splitting)


def kernel_subalgebra(d: int, q: int, n: int, kind: str) -> GradedLieAlgebra:
    """The kernel of level q+1 -> level q as an abelian subalgebra: the
    h-order q+1 monomials (with the scalar line for the G column)."""
    upper = (build_g_level if kind == "G" else build_derd_level)(d, q + 1, n)
    monos = [m for m in upper.tags if m.hexp == q + 1]
    return GradedLieAlgebra(
        f"h^{q}*{'A' if kind == 'G' else 'H'}(d={d},N={n})",
        tuple(f"h^-1*{m}" for m in monos),
        tuple(m.weight - 2 for m in monos),
        {},
        upper.cutoff,
        tuple(monos),
    )


def column_extension(d: int, q: int, n: int, kind: str) -> ExtensionData:
    """0 -> ker -> level_{q+1} -> level_q -> 0 for the G or DerD column."""
    build = build_g_level if kind == "G" else build_derd_level
    upper, lower = build(d, q + 1, n), build(d, q, n)
    ker = kernel_subalgebra(d, q, n, kind)
    inject = LieMap.build(
        ker, upper, _aligned_columns(ker, upper, lambda m: m), name=f"ker->{upper.name}"
    )
    project = level_quotient_map(d, q, n, kind)
    splitting = LinearMap(lower, upper, _aligned_columns(lower, upper, lambda m: m))
    return ExtensionData(ker, upper, lower, inject, project, splitting)


def v_extension(d: int, p: int, n: int) -> ExtensionData:
    """0 -> V -> G_{p+1} -> DerD_p -> 0, the one-step obstruction extension.

    V is the kernel: all scalars h^-1 k[h]/h^(p+2) together with the
    non-scalar h-order p+1 monomials (the h^p A part glued along h^p k).
    """
    g = build_g_level(d, p + 1, n)
    derd = build_derd_level(d, p, n)
    v_monos = [m for m in g.tags if _is_scalar(m) or m.hexp == p + 1]
    v_alg = GradedLieAlgebra(
        f"V(d={d},p={p},N={n})",
        tuple(f"h^-1*{m}" for m in v_monos),
        tuple(m.weight - 2 for m in v_monos),
        {},
        g.cutoff,
        tuple(v_monos),
    )
    inject = LieMap.build(
        v_alg, g, _aligned_columns(v_alg, g, lambda m: m), name=f"V->{g.name}"
    )
    project = LieMap.build(
        g,
        derd,
        _aligned_columns(
            g, derd, lambda m: None if (_is_scalar(m) or m.hexp == p + 1) else m
        ),
        name=f"{g.name}->{derd.name}",
    )
    splitting = LinearMap(derd, g, _aligned_columns(derd, g, lambda m: m))
    return ExtensionData(v_alg, g, derd, inject, project, splitting)


@dataclass
class DerDTower:
    """Levels 0..p of the derivation quotient with the connecting maps."""

    levels: list
    quotients: list  # quotients[q]: levels[q+1] -> levels[q]


def build_derd_tower(d: int, p: int, n: int) -> DerDTower:
    levels = [build_derd_level(d, q, n) for q in range(p + 1)]
    quotients = [level_quotient_map(d, q, n, "DerD") for q in range(p)]
    return DerDTower(levels, quotients)


@dataclass
class GTower:
    """Levels 0..p of the extension algebra, their connecting maps, and the
    scalar extension row over each level."""

    levels: list
    quotients: list
    rows: list  # rows[q]: 0 -> k[h]/h^(q+1) -> G_q -> DerD_q -> 0


def build_g_tower(d: int, p: int, n: int) -> GTower:
    levels = [build_g_level(d, q, n) for q in range(p + 1)]
    quotients = [level_quotient_map(d, q, n, "G") for q in range(p)]
    rows = [cent_row(d, q, n) for q in range(p + 1)]
    return GTower(levels, quotients, rows)


# ---------------------------------------------------------------------------
# the commutative-ladder check
# ---------------------------------------------------------------------------


def commu_diagram_check(d: int, p: int, n: int, corrupt: bool = False) -> Report:
    """Verify the two-level ladder of extensions at levels p and p+1.

    Checks, weight by weight and with exact arithmetic: exactness and
    centrality of both extension rows, exactness of the G and DerD columns,
    triviality of the scalar column, commutativity of all squares, Jacobi on
    every level, and the identification of the column kernels with functions
    (for G) and Hamiltonian fields (for DerD), shifted by h^(p+1).

    With corrupt=True one structure constant of the upper level is shifted
    first, to demonstrate that failures carry a named witness.
    """
    report = Report("tower check", {"d": d, "p": p, "N": n, "corrupt": corrupt})

    g_upper = build_g_level(d, p + 1, n)
    if corrupt:
        target = next(iter(g_upper.brackets))
        i, j = target
        w = g_upper.weights[i] + g_upper.weights[j]
        k = next(
            k for k, wk in enumerate(g_upper.weights) if wk == w
        )
        g_upper = g_upper.with_corrupted_bracket(i, j, k, 1)

    try:
        rows = {
            p: cent_row(d, p, n),
            p + 1: _cent_row_for(g_upper, d, p + 1, n),
        }
    except CheckFailure as exc:
        report.add("row-extension-build", False, witness=exc.witness, detail=str(exc))
        return report.finish()

    report.run("row2-jacobi", _jacobi_detail, g_upper)
    report.run("row3-jacobi", _jacobi_detail, rows[p].total)
    report.run("row2-exact", rows[p + 1].check_exact)
    report.run("row2-central", rows[p + 1].check_sub_central)
    report.run("row3-exact", rows[p].check_exact)
    report.run("row3-central", rows[p].check_sub_central)

    # columns
    def build_columns():
        col_g = _column_for(g_upper, d, p, n, "G")
        col_derd = column_extension(d, p, n, "DerD")
        return col_g, col_derd

    try:
        col_g, col_derd = build_columns()
    except CheckFailure as exc:
        report.add("column-build", False, witness=exc.witness, detail=str(exc))
        return report.finish()

    report.run("col2-exact", col_g.check_exact)
    report.run("col2-kernel-abelian", col_g.check_sub_abelian)
    report.run("col3-exact", col_derd.check_exact)
    report.run(
        "col2-kernel-is-A",
        _kernel_dims_check,
        col_g.sub,
        d,
        p,
        n,
        include_constant=True,
    )
    report.run(
        "col3-kernel-is-H",
        _kernel_dims_check,
        col_derd.sub,
        d,
        p,
        n,
        include_constant=False,
    )

    # scalar column: 0 -> h^p k -> k[h]/h^(p+2) -> k[h]/h^(p+1) -> 0
    report.run("col1-exact-and-trivial", _scalar_column_check, d, p, n)

    # squares
    report.run(
        "square-inject",
        _square_inject_check,
        rows[p + 1],
        rows[p],
        col_g,
    )
    report.run(
        "square-project",
        _square_project_check,
        rows[p + 1],
        rows[p],
        col_g,
        col_derd,
    )
    report.run("row1-exact", _row1_check, col_g, col_derd, rows[p + 1])
    return report.finish()


def _jacobi_detail(algebra):
    exempt = algebra.verify_jacobi()
    return f"{algebra.name}: jacobi ok, {exempt} overflow-exempt triples"


def _cent_row_for(g: GradedLieAlgebra, d: int, q: int, n: int) -> ExtensionData:
    """cent_row, but over a supplied (possibly corrupted) total algebra."""
    derd = _derd_from_g(g, d, q, n)
    scalars = build_scalars(d, q, n)
    inject = LieMap.build(
        scalars, g, _aligned_columns(scalars, g, lambda m: m), name=f"k[h]->{g.name}"
    )
    project = LieMap.build(
        g,
        derd,
        _aligned_columns(g, derd, lambda m: None if _is_scalar(m) else m),
        name=f"{g.name}->{derd.name}",
    )
    splitting = LinearMap(derd, g, _aligned_columns(derd, g, lambda m: m))
    return ExtensionData(scalars, g, derd, inject, project, splitting)


def _derd_from_g(g: GradedLieAlgebra, d: int, q: int, n: int) -> GradedLieAlgebra:
    """Quotient a (possibly corrupted) G level by its scalar line."""
    monos = [m for m in g.tags if not _is_scalar(m)]
    index_g = {m: k for k, m in enumerate(g.tags)}
    index = {m: k for k, m in enumerate(monos)}
    brackets = {}
    for i, mi in enumerate(monos):
        for j in range(i + 1, len(monos)):
            mj = monos[j]
            raw = g.bracket(index_g[mi], index_g[mj])
            vec = {}
            for k, c in raw.items():
                mono = g.tags[k]
                if _is_scalar(mono):
                    continue
                vec[index[mono]] = c
            if vec:
                brackets[(i, j)] = vec
    return GradedLieAlgebra(
        f"DerD_{q}(d={d},N={n})",
        tuple(f"h^-1*{m}" for m in monos),
        tuple(m.weight - 2 for m in monos),
        brackets,
        g.cutoff,
        tuple(monos),
    )


def _column_for(g_upper, d, p, n, kind):
    lower = build_g_level(d, p, n)
    ker = kernel_subalgebra(d, p, n, kind)
    index_upper = {m: k for k, m in enumerate(g_upper.tags)}
    inject = LieMap.build(
        ker,
        g_upper,
        {
            i: {index_upper[m]: Fraction(1)}
            for i, m in enumerate(ker.tags)
        },
        name=f"ker->{g_upper.name}",
    )
    project = LieMap.build(
        g_upper,
        lower,
        _aligned_columns(g_upper, lower, lambda m: m if m.hexp <= p else None),
        name=f"{g_upper.name}->{lower.name}",
    )
    splitting = LinearMap(lower, g_upper, _aligned_columns(lower, g_upper, lambda m: m))
    return ExtensionData(ker, g_upper, lower, inject, project, splitting)


def _kernel_dims_check(kernel, d, p, n, include_constant):
    """Kernel of a column matches functions (or functions mod constants)
    weight-by-weight, shifted by the h^(p+1) twist."""
    dims = kernel.weight_dims()
    shift = 2 * (p + 1)
    expected = {}
    for m in all_monomials(d, n - shift, min_degree=0 if include_constant else 1):
        w = m.weight + shift - 2
        expected[w] = expected.get(w, 0) + 1
    if dims != expected:
        raise CheckFailure(
            "kernel dimensions do not match the twisted function space",
            witness={"kernel": dims, "expected": expected},
        )
    return f"weights {sorted(dims)} match"


def _scalar_column_check(d, p, n):
    upper = build_scalars(d, p + 1, n)
    lower = build_scalars(d, p, n)
    if upper.brackets or lower.brackets:
        raise CheckFailure("scalar algebras must be abelian")
    # quotient map is the aligned truncation; kernel is the top scalar line
    columns = _aligned_columns(upper, lower, lambda m: m if m.hexp <= p else None)
    proj = LieMap.build(upper, lower, columns, name="k[h] truncation")
    top = [m for m in upper.tags if m.hexp == p + 1]
    if 2 * (p + 1) <= n and len(top) != 1:
        raise CheckFailure(
            "scalar column kernel is not one line",
            witness={"kernel_size": len(top)},
        )
    # the evident aligned section splits it, so the extension is trivial
    section = LinearMap(lower, upper, _aligned_columns(lower, upper, lambda m: m))
    for i in range(lower.dim):
        if proj.apply(section.column(i)) != {i: Fraction(1)}:
            raise CheckFailure("scalar column section failure", witness={"index": i})
    return "trivial extension of trivial modules"


def _square_inject_check(row_upper, row_lower, col_g):
    """col2 o inject_{p+1} = inject_p o col1 on scalar basis elements."""
    upper_scalars, lower_scalars = row_upper.sub, row_lower.sub
    lower_index = {m: k for k, m in enumerate(lower_scalars.tags)}
    for i, mono in enumerate(upper_scalars.tags):
        via_total = col_g.project.apply(row_upper.inject.column(i))
        via_scalars = (
            row_lower.inject.column(lower_index[mono]) if mono in lower_index else {}
        )
        if via_total != via_scalars:
            raise CheckFailure(
                f"inject square does not commute at {upper_scalars.labels[i]}",
                witness={"index": i, "via_total": via_total, "via_scalars": via_scalars},
            )


def _square_project_check(row_upper, row_lower, col_g, col_derd):
    """col3 o project_{p+1} = project_p o col2 on the upper total basis."""
    for i in range(row_upper.total.dim):
        one = {i: Fraction(1)}
        left = col_derd.project.apply(row_upper.project.apply(one))
        right = row_lower.project.apply(col_g.project.apply(one))
        if left != right:
            raise CheckFailure(
                f"project square does not commute at {row_upper.total.labels[i]}",
                witness={"index": i, "left": left, "right": right},
            )


def _row1_check(col_g, col_derd, row_upper):
    """0 -> h^p k -> h^p A -> h^p H -> 0: the row induced on column kernels."""
    a_ker, h_ker = col_g.sub, col_derd.sub
    h_index = {m: k for k, m in enumerate(h_ker.tags)}
    kernel_of_induced = []
    for i, mono in enumerate(a_ker.tags):
        # induced map: project the G-kernel monomial into the DerD-kernel
        image = {} if _is_scalar(mono) else {h_index[mono]: Fraction(1)}
        if not image:
            kernel_of_induced.append(mono)
        # compatibility with the row projections
        via_row = row_upper.project.apply(col_g.inject.column(i))
        expected = (
            {} if _is_scalar(mono) else col_derd.inject.column(h_index[mono])
        )
        if via_row != expected:
            raise CheckFailure(
                f"row1 square does not commute at {a_ker.labels[i]}",
                witness={"index": i},
            )
    if len(kernel_of_induced) != 1 or not _is_scalar(kernel_of_induced[0]):
        raise CheckFailure(
            "kernel of h^p A -> h^p H is not the scalar line",
            witness={"kernel": [str(m) for m in kernel_of_induced]},
        )
    return "induced row exact with scalar-line kernel"


# ---------------------------------------------------------------------------
# splittings
# ---------------------------------------------------------------------------


def sp_subalgebra(derd: GradedLieAlgebra):
    """The span of the quadratic symbols inside a derivation level: sp(2d).

    Returns (sp as its own algebra, index list into the ambient level).
    """
    indices = [
        i
        for i, m in enumerate(derd.tags)
        if m.hexp == 0 and m.weight == 2 and not _is_scalar(m)
    ]
    pos = {i: a for a, i in enumerate(indices)}
    brackets = {}
    for a, i in enumerate(indices):
        for b in range(a + 1, len(indices)):
            j = indices[b]
            vec = {}
            for k, c in derd.bracket(i, j).items():
                if k not in pos:
                    raise CheckFailure(
                        "quadratic symbols do not close under the bracket",
                        witness={"pair": (i, j), "component": k},
                    )
                vec[pos[k]] = c
            if vec:
                brackets[(a, b)] = vec
    sp = GradedLieAlgebra(
        f"sp({2 * derd.tags[0].dimension})",
        tuple(derd.labels[i] for i in indices),
        tuple(0 for _ in indices),
        brackets,
        0,
        tuple(derd.tags[i] for i in indices),
    )
    sp.verify_graded()
    sp.verify_jacobi()
    return sp, indices


def levi_restriction_split(d: int, p: int, n: int):
    """A bracket-preserving section of G_p -> DerD_p over sp(2d).

    Found by exact linear algebra: the splitting defect of the monomial
    section restricted to the quadratic symbols is a scalar-valued 2-cocycle;
    its primitive (which exists, sp being semisimple) corrects the section.
    Returns (section LieMap from sp into G_p, sp algebra, ambient indices,
    defect cochain, primitive cochain).
    """
    row = cent_row(d, p, n)
    sp, indices = sp_subalgebra(row.quotient)
    module = cohomology.trivial_module(
        sp,
        labels=row.sub.labels,
        weights=tuple(0 for _ in row.sub.labels),
        name=f"{row.sub.name} trivial over sp",
    )
    values = {}
    for a in range(sp.dim):
        for b in range(a + 1, sp.dim):
            defect = row.defect(indices[a], indices[b])
            if defect:
                values[(a, b)] = defect
    cocycle = cohomology.Cochain(module, 2, values)
    found, primitive = cohomology.is_coboundary(cocycle)
    if not found:
        raise CheckFailure(
            "no Levi section: the restricted cocycle is not a coboundary "
            "(this must never happen; it indicates a build bug)",
        )
    columns = {}
    for a in range(sp.dim):
        base = dict(row.splitting.column(indices[a]))
        correction = primitive.value((a,))
        for m, c in correction.items():
            img = row.inject.column(m)
            base = vec_add(base, vec_scale(img, -c))
        columns[a] = base
    section = LieMap.build(sp, row.total, columns, name=f"sp->{row.total.name}")
    return section, sp, indices, cocycle, primitive


def d1_semidirect_split(d: int, n: int) -> LieMap:
    """The bracket-preserving section DerD_0 -> DerD_1 via the split model.

    A Hamiltonian symbol f acts on the order-one algebra through its
    iota-even lift, so the section sends f to h^-1(f - (h/2) Laplace f),
    scalar parts dropped.
    """
    derd0 = build_derd_level(d, 0, n)
    derd1 = build_derd_level(d, 1, n)
    index1 = {m: k for k, m in enumerate(derd1.tags)}
    columns = {}
    for i, mono in enumerate(derd0.tags):
        f = TruncatedPoly(d, n, {mono: Fraction(1)})
        vec: Vector = {index1[mono]: Fraction(1)}
        for m, c in mixed_laplacian(f).terms.items():
            lifted = Monomial(m.xexp, m.yexp, 1)
            if _is_scalar(lifted) or lifted.weight > n:
                continue
            pos = index1[lifted]
            vec[pos] = vec.get(pos, Fraction(0)) - c / 2
        columns[i] = {k: c for k, c in vec.items() if c != 0}
    return LieMap.build(derd0, derd1, columns, name="DerD_0 -> DerD_1")


def almost_inner_action(
    level: GradedLieAlgebra, vec: Vector, u: WeylElement
) -> WeylElement:
    """The derivation attached to a level element, applied to u: [rep, u]/h.

    The commutator is taken one h-order and two weights deeper, so the
    division by h is exact at u's truncation.
    """
    spec = u.spec
    deep = TruncationSpec(spec.d, spec.h_order + 1, spec.cutoff + 2)
    rep = WeylElement(deep, {level.tags[i]: c for i, c in vec.items()})
    comm = commutator(rep, u.respec(deep))
    terms = {}
    for mono, coeff in comm.terms.items():
        if mono.hexp < 1:
            raise InternalError("almost-inner commutator not divisible by h")
        lowered = Monomial(mono.xexp, mono.yexp, mono.hexp - 1)
        if lowered.hexp <= spec.h_order and lowered.weight <= spec.cutoff:
            terms[lowered] = coeff
    return WeylElement(spec, terms)


# ---------------------------------------------------------------------------
# the obstruction extension
# ---------------------------------------------------------------------------


@dataclass
class ObstructionCocycle:
    """The V-valued cocycle of the one-step extension G_{p+1} -> DerD_p."""

    extension: ExtensionData
    module: cohomology.LieModule
    cochain: cohomology.Cochain

    def push_to_hamiltonian(self) -> cohomology.Cochain:
        """Push forward along V -> V/scalars (the Hamiltonian quotient)."""
        keep = [
            m for m, mono in enumerate(self.extension.sub.tags) if not _is_scalar(mono)
        ]
        pos = {m: r for r, m in enumerate(keep)}
        quotient_module = cohomology.LieModule(
            self.module.algebra,
            self.module.name + "/scalars",
            tuple(self.extension.sub.labels[m] for m in keep),
            tuple(self.extension.sub.weights[m] for m in keep),
            {
                (i, pos[m]): {
                    pos[k]: c for k, c in vec.items() if k in pos
                }
                for (i, m), vec in self.module.action.items()
                if m in pos
            },
            self.module.cutoff,
        )
        values = {}
        for idx, vec in self.cochain.values.items():
            pushed = {pos[m]: c for m, c in vec.items() if m in pos}
            if pushed:
                values[idx] = pushed
        return cohomology.Cochain(quotient_module, 2, values)

    def scalar_restriction_to_sp(self):
        """Restrict to sp(2d) and project to the scalar summand of V.

        On quadratic symbols the defect is purely scalar-valued, so this is a
        genuine trivial-module cocycle there.
        """
        sp, indices = sp_subalgebra(self.extension.quotient)
        scalar_positions = [
            m for m, mono in enumerate(self.extension.sub.tags) if _is_scalar(mono)
        ]
        pos = {m: r for r, m in enumerate(scalar_positions)}
        module = cohomology.trivial_module(
            sp,
            labels=tuple(self.extension.sub.labels[m] for m in scalar_positions),
            weights=tuple(0 for _ in scalar_positions),
            name="scalar part over sp",
        )
        back = {i: a for a, i in enumerate(indices)}
        values = {}
        for (i, j), vec in self.cochain.values.items():
            if i in back and j in back:
                nonscalar = {m: c for m, c in vec.items() if m not in pos}
                if nonscalar:
                    raise CheckFailure(
                        "sp-restricted obstruction value is not scalar",
                        witness={"pair": (i, j), "value": nonscalar},
                    )
                projected = {pos[m]: c for m, c in vec.items()}
                if projected:
                    values[(back[i], back[j])] = projected
        return cohomology.Cochain(module, 2, values), sp, indices


def tower_obstruction(d: int, p: int, n: int) -> ObstructionCocycle:
    """The extension class controlling the lift from level p to level p+1."""
    e = v_extension(d, p, n)
    module = cohomology.module_from_extension(e, name=f"V(d={d},p={p})")
    module.verify_representation()
    cochain = cohomology.extension_cocycle(e, module)
    return ObstructionCocycle(e, module, cochain)

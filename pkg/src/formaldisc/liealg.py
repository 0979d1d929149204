"""Weight-graded Lie algebras given by exact structure constants.

A GradedLieAlgebra stores a finite ordered basis with integer weights and the
brackets of basis pairs as sparse rational vectors.  Brackets are graded:
[w_a, w_b] lands in weight w_a + w_b.  Since some weights are negative, the
span of over-cutoff weights is not an ideal, so a pair of basis elements is
"in cutoff" only when the weight of its bracket fits under the cutoff;
verification sweeps exempt (and count) the others.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .errors import CheckFailure, UsageError

Vector = dict  # basis index -> Fraction


def vec_add(u: Vector, v: Vector) -> Vector:
    out = dict(u)
    for k, c in v.items():
        acc = out.get(k, Fraction(0)) + c
        if acc == 0:
            out.pop(k, None)
        else:
            out[k] = acc
    return out


def vec_scale(u: Vector, value) -> Vector:
    if value == 0:
        return {}
    return {k: c * value for k, c in u.items()}


def vec_sub(u: Vector, v: Vector) -> Vector:
    return vec_add(u, vec_scale(v, Fraction(-1)))


@dataclass
class GradedLieAlgebra:
    name: str
    labels: tuple[str, ...]
    weights: tuple[int, ...]
    brackets: dict[tuple[int, int], Vector]
    cutoff: int
    tags: tuple = ()

    def __post_init__(self):
        if len(self.labels) != len(self.weights):
            raise UsageError("labels and weights must align")
        for (i, j) in self.brackets:
            if not 0 <= i < j < len(self.labels):
                raise UsageError(f"bracket key ({i},{j}) must satisfy i<j")
        self._index = {label: k for k, label in enumerate(self.labels)}

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self._index[label]

    def bracket(self, i: int, j: int) -> Vector:
        if i == j:
            return {}
        if i < j:
            return self.brackets.get((i, j), {})
        return vec_scale(self.brackets.get((j, i), {}), Fraction(-1))

    def bracket_vec(self, u: Vector, v: Vector) -> Vector:
        out: Vector = {}
        for i, ci in u.items():
            for j, cj in v.items():
                if i == j:
                    continue
                c = ci * cj
                for k, ck in self.bracket(i, j).items():
                    acc = out.get(k, Fraction(0)) + c * ck
                    if acc == 0:
                        out.pop(k, None)
                    else:
                        out[k] = acc
        return out

    def in_cutoff_pair(self, i: int, j: int) -> bool:
        return self.weights[i] + self.weights[j] <= self.cutoff

    def in_cutoff_triple(self, i: int, j: int, k: int) -> bool:
        w = self.weights
        return (
            w[i] + w[j] <= self.cutoff
            and w[j] + w[k] <= self.cutoff
            and w[i] + w[k] <= self.cutoff
            and w[i] + w[j] + w[k] <= self.cutoff
        )

    def weight_dims(self) -> dict[int, int]:
        dims: dict[int, int] = {}
        for w in self.weights:
            dims[w] = dims.get(w, 0) + 1
        return dims

    def basis_indices_of_weight(self, w: int):
        return [i for i, wi in enumerate(self.weights) if wi == w]

    # -- verification ------------------------------------------------------

    def verify_graded(self):
        """Every stored bracket component sits in weight w_i + w_j."""
        for (i, j), vec in self.brackets.items():
            for k, c in vec.items():
                if c != 0 and self.weights[k] != self.weights[i] + self.weights[j]:
                    raise CheckFailure(
                        f"{self.name}: bracket [{self.labels[i]},{self.labels[j]}] "
                        f"has off-weight component {self.labels[k]}",
                        witness={"pair": (i, j), "component": k},
                    )

    def verify_jacobi(self):
        """Exact Jacobi on all in-cutoff basis triples.

        Returns the number of exempt (overflowing) triples; raises on any
        violation with the offending triple as witness.
        """
        exempt = 0
        n = self.dim
        for i in range(n):
            for j in range(i + 1, n):
                bij = self.bracket(i, j)
                for k in range(j + 1, n):
                    if not self.in_cutoff_triple(i, j, k):
                        exempt += 1
                        continue
                    acc = self.bracket_vec(bij, {k: Fraction(1)})
                    acc = vec_add(
                        acc, self.bracket_vec(self.bracket(j, k), {i: Fraction(1)})
                    )
                    acc = vec_add(
                        acc, self.bracket_vec(self.bracket(k, i), {j: Fraction(1)})
                    )
                    if acc:
                        raise CheckFailure(
                            f"{self.name}: Jacobi fails on "
                            f"({self.labels[i]}, {self.labels[j]}, {self.labels[k]})",
                            witness={"triple": (i, j, k), "defect": acc},
                        )
        return exempt

    def with_corrupted_bracket(self, i: int, j: int, k: int, delta) -> "GradedLieAlgebra":
        """A copy with one structure constant shifted; for fault-injection tests."""
        if i >= j:
            i, j = j, i
        brackets = {key: dict(vec) for key, vec in self.brackets.items()}
        vec = brackets.setdefault((i, j), {})
        vec[k] = vec.get(k, Fraction(0)) + Fraction(delta)
        if vec[k] == 0:
            del vec[k]
        return GradedLieAlgebra(
            self.name + "(corrupted)",
            self.labels,
            self.weights,
            brackets,
            self.cutoff,
            self.tags,
        )

    def to_json(self):
        return {
            "name": self.name,
            "cutoff": self.cutoff,
            "basis": list(self.labels),
            "weights": list(self.weights),
            "brackets": {
                f"{i},{j}": {
                    str(k): f"{c.numerator}/{c.denominator}" for k, c in sorted(vec.items())
                }
                for (i, j), vec in sorted(self.brackets.items())
                if vec
            },
        }


@dataclass
class LinearMap:
    """Weight-preserving linear map between graded algebras (no bracket claim)."""

    source: GradedLieAlgebra
    target: GradedLieAlgebra
    columns: dict[int, Vector] = field(default_factory=dict)

    def __post_init__(self):
        for i, vec in self.columns.items():
            for k, c in vec.items():
                if c != 0 and self.target.weights[k] != self.source.weights[i]:
                    raise UsageError(
                        f"map {self.source.name} -> {self.target.name} shifts weight "
                        f"on {self.source.labels[i]}"
                    )

    def column(self, i: int) -> Vector:
        return self.columns.get(i, {})

    def apply(self, vec: Vector) -> Vector:
        out: Vector = {}
        for i, c in vec.items():
            out = vec_add(out, vec_scale(self.column(i), c))
        return out

    def compose(self, first: "LinearMap") -> "LinearMap":
        """self after first."""
        if first.target is not self.source:
            raise UsageError("compose chain mismatch")
        cols = {i: self.apply(first.column(i)) for i in range(first.source.dim)}
        return LinearMap(first.source, self.target, cols)

    def matrix_block(self, weight: int):
        """Dense matrix of the map restricted to one source/target weight."""
        src = self.source.basis_indices_of_weight(weight)
        tgt = self.target.basis_indices_of_weight(weight)
        tgt_pos = {k: r for r, k in enumerate(tgt)}
        block = [[Fraction(0)] * len(src) for _ in tgt]
        for c, i in enumerate(src):
            for k, val in self.column(i).items():
                block[tgt_pos[k]][c] = val
        return block, src, tgt


class LieMap(LinearMap):
    """A LinearMap verified bracket-preserving on every in-cutoff basis pair."""

    @staticmethod
    def build(source, target, columns, name="map") -> "LieMap":
        m = LieMap(source, target, columns)
        m.verify(name)
        return m

    def verify(self, name="map"):
        n = self.source.dim
        for i in range(n):
            for j in range(i + 1, n):
                if not self.source.in_cutoff_pair(i, j):
                    continue
                lhs = self.apply(self.source.bracket(i, j))
                rhs = self.target.bracket_vec(self.column(i), self.column(j))
                if lhs != rhs:
                    raise CheckFailure(
                        f"{name}: bracket not preserved on "
                        f"({self.source.labels[i]}, {self.source.labels[j]})",
                        witness={"pair": (i, j), "lhs": lhs, "rhs": rhs},
                    )


@dataclass
class ExtensionData:
    """A short exact sequence 0 -> sub -> total -> quotient -> 0 with a
    chosen linear (not necessarily bracket-preserving) section of project."""

    sub: GradedLieAlgebra
    total: GradedLieAlgebra
    quotient: GradedLieAlgebra
    inject: LieMap
    project: LieMap
    splitting: LinearMap

    def weights_involved(self):
        return sorted(set(self.total.weights) | set(self.sub.weights) | set(self.quotient.weights))

    def check_exact(self):
        """Weight-by-weight: inject injective, project surjective,
        ker(project) = im(inject), and project o inject = 0."""
        for i in range(self.sub.dim):
            if self.project.apply(self.inject.column(i)):
                raise CheckFailure(
                    f"{self.total.name}: project o inject nonzero on {self.sub.labels[i]}",
                    witness={"sub_index": i},
                )
        for w in self.weights_involved():
            inj_block, _, _ = self.inject.matrix_block(w)
            proj_block, _, _ = self.project.matrix_block(w)
            sub_dim = len(self.sub.basis_indices_of_weight(w))
            quot_dim = len(self.quotient.basis_indices_of_weight(w))
            total_dim = len(self.total.basis_indices_of_weight(w))
            inj_rank = linalg.rank(inj_block) if sub_dim and total_dim else 0
            proj_rank = linalg.rank(proj_block) if quot_dim and total_dim else 0
            if inj_rank != sub_dim:
                raise CheckFailure(
                    f"{self.total.name}: inject not injective at weight {w}",
                    witness={"weight": w, "rank": inj_rank, "dim": sub_dim},
                )
            if proj_rank != quot_dim:
                raise CheckFailure(
                    f"{self.total.name}: project not surjective at weight {w}",
                    witness={"weight": w, "rank": proj_rank, "dim": quot_dim},
                )
            if total_dim - proj_rank != inj_rank:
                raise CheckFailure(
                    f"{self.total.name}: ker(project) != im(inject) at weight {w}",
                    witness={
                        "weight": w,
                        "kernel_dim": total_dim - proj_rank,
                        "image_dim": inj_rank,
                    },
                )

    def check_splitting(self):
        for i in range(self.quotient.dim):
            back = self.project.apply(self.splitting.column(i))
            if back != {i: Fraction(1)}:
                raise CheckFailure(
                    f"{self.total.name}: splitting is not a section at "
                    f"{self.quotient.labels[i]}",
                    witness={"index": i, "projected": back},
                )

    def check_sub_central(self):
        """Brackets of injected sub elements with everything vanish."""
        for i in range(self.sub.dim):
            img = self.inject.column(i)
            for j in range(self.total.dim):
                if self.total.bracket_vec(img, {j: Fraction(1)}):
                    raise CheckFailure(
                        f"{self.total.name}: sub element {self.sub.labels[i]} "
                        f"not central against {self.total.labels[j]}",
                        witness={"sub_index": i, "total_index": j},
                    )

    def check_sub_abelian(self):
        for (i, j), vec in self.sub.brackets.items():
            if vec:
                raise CheckFailure(
                    f"{self.sub.name}: sub not abelian at ({i},{j})",
                    witness={"pair": (i, j)},
                )

    def sub_coordinates(self, vec: Vector) -> Vector:
        """Express a total-algebra vector lying in im(inject) in sub basis.

        Raises CheckFailure if the vector is not in the image.
        """
        if not vec:
            return {}
        weights = {self.total.weights[k] for k in vec}
        out: Vector = {}
        for w in weights:
            block, src, tgt = self.inject.matrix_block(w)
            tgt_pos = {k: r for r, k in enumerate(tgt)}
            rhs = [Fraction(0)] * len(tgt)
            for k, c in vec.items():
                if self.total.weights[k] == w:
                    rhs[tgt_pos[k]] = c
            if not src:
                if any(rhs):
                    raise CheckFailure(
                        "vector not in image of inject", witness={"weight": w}
                    )
                continue
            sol = linalg.solve(block, rhs)
            if sol is None:
                raise CheckFailure(
                    "vector not in image of inject", witness={"weight": w}
                )
            for pos, c in zip(src, sol):
                if c != 0:
                    out[pos] = c
        return out

    def defect(self, i: int, j: int) -> Vector:
        """[s(e_i), s(e_j)] - s([e_i, e_j]) in sub coordinates."""
        lhs = self.total.bracket_vec(self.splitting.column(i), self.splitting.column(j))
        rhs = self.splitting.apply(self.quotient.bracket(i, j))
        return self.sub_coordinates(vec_sub(lhs, rhs))


def extension_defect_cochain(e: ExtensionData) -> dict[tuple[int, int], Vector]:
    """The splitting defect on all in-cutoff quotient basis pairs.

    This is the raw 2-cochain of the extension; the cohomology layer wraps it
    with the module action and verifies the cocycle identity.
    """
    out = {}
    for i in range(e.quotient.dim):
        for j in range(i + 1, e.quotient.dim):
            if not e.quotient.in_cutoff_pair(i, j):
                continue
            vec = e.defect(i, j)
            if vec:
                out[(i, j)] = vec
    return out

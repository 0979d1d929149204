"""Series kernel: exact ring arithmetic, calculus, forms, Poisson brackets."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formaldisc.errors import UsageError
from formaldisc.series import (
    DifferentialForm,
    Monomial,
    PoissonBivector,
    TruncatedPoly,
    all_monomials,
    de_rham_d,
    euler_contraction,
    poisson_bracket,
    standard_poisson,
    wedge,
)

D, N = 2, 7

coeffs = st.sampled_from(
    [Fraction(1), Fraction(-1), Fraction(2), Fraction(1, 2), Fraction(-3, 4), Fraction(5)]
)


@st.composite
def monomials(draw, d=D, max_weight=N, with_h=True):
    while True:
        xexp = tuple(draw(st.integers(0, 2)) for _ in range(d))
        yexp = tuple(draw(st.integers(0, 2)) for _ in range(d))
        hexp = draw(st.integers(0, 1)) if with_h else 0
        mono = Monomial(xexp, yexp, hexp)
        if mono.weight <= max_weight:
            return mono


@st.composite
def polys(draw, d=D, cutoff=N, with_h=True):
    terms = draw(
        st.dictionaries(monomials(d, cutoff, with_h), coeffs, min_size=0, max_size=4)
    )
    return TruncatedPoly(d, cutoff, terms)


def x(i, d=D, n=N):
    return TruncatedPoly.x(i, d, n)


def y(i, d=D, n=N):
    return TruncatedPoly.y(i, d, n)


class TestRingAxioms:
    @settings(max_examples=60, deadline=None)
    @given(polys(), polys(), polys())
    def test_mul_associative(self, p, q, r):
        assert (p * q) * r == p * (q * r)

    @settings(max_examples=60, deadline=None)
    @given(polys(), polys())
    def test_mul_commutative(self, p, q):
        assert p * q == q * p

    @settings(max_examples=60, deadline=None)
    @given(polys(), polys(), polys())
    def test_distributive(self, p, q, r):
        assert p * (q + r) == p * q + p * r

    @settings(max_examples=40, deadline=None)
    @given(polys())
    def test_identities(self, p):
        one = TruncatedPoly.one(D, N)
        zero = TruncatedPoly.zero(D, N)
        assert p * one == p
        assert p + zero == p
        assert p - p == zero

    def test_monomial_product(self):
        assert x(0) * y(0) == TruncatedPoly(
            D, N, {Monomial((1, 0), (1, 0), 0): Fraction(1)}
        )

    def test_geometric_series_against_long_division(self):
        # oracle: coefficients of 1/(1+x1) by direct long division
        def long_division(n):
            # 1 = (1 + x) * q  =>  q_0 = 1, q_k = -q_{k-1}
            q = [Fraction(1)]
            for _ in range(n):
                q.append(-q[-1])
            return q

        n = 7
        series = TruncatedPoly.zero(D, n)
        for k, c in enumerate(long_division(n)):
            series = series + (x(0, D, n) ** k).scaled(c)
        one = TruncatedPoly.one(D, n)
        assert (one + x(0, D, n)) * series == one

    def test_truncation_discards_overflow(self):
        p = x(0, 1, 3) ** 2
        q = x(0, 1, 3) ** 2
        assert (p * q).is_zero()  # weight 4 > 3

    def test_cutoff_mismatch_rejected(self):
        with pytest.raises(UsageError):
            x(0, 1, 3) + x(0, 1, 4)
        with pytest.raises(UsageError):
            x(0, 1, 3) * TruncatedPoly.one(2, 3)

    def test_canonical_form_unique(self):
        p = x(0) + y(1) - x(0)
        q = y(1)
        assert p == q and hash(p) == hash(q)

    def test_monomial_order_total(self):
        monos = all_monomials(2, 3) + [Monomial((0, 0), (0, 0), 1)]
        keys = [m.sort_key() for m in monos]
        assert len(set(keys)) == len(keys)
        ordered = sorted(monos, key=lambda m: m.sort_key())
        assert [m.weight for m in ordered] == sorted(m.weight for m in ordered)


class TestCalculus:
    def test_power_rule(self):
        p = x(0) ** 2 * y(0)
        assert p.partial(0) == x(0).scaled(2) * y(0)

    def test_derivative_of_missing_variable(self):
        assert x(0).partial(D).is_zero()  # d/dy1 x1 = 0

    @settings(max_examples=50, deadline=None)
    @given(polys(), st.integers(0, 2 * D - 1), st.integers(0, 2 * D - 1))
    def test_partials_commute(self, p, v, w):
        assert p.partial(v).partial(w) == p.partial(w).partial(v)

    def test_h_not_differentiable(self):
        with pytest.raises(UsageError):
            TruncatedPoly.h(D, N).partial(2 * D)

    def test_substitute_requires_origin_fixed(self):
        images = [x(0), y(0), x(1), y(1)]
        images[0] = images[0] + 1
        with pytest.raises(UsageError):
            x(0).substitute(images)


@st.composite
def one_forms(draw, d=D, cutoff=N):
    comps = {}
    for v in range(2 * d):
        if draw(st.booleans()):
            comps[(v,)] = draw(polys(d, cutoff, with_h=False))
    return DifferentialForm(d, cutoff, 1, comps)


class TestForms:
    def test_d_of_x_dy(self):
        f = DifferentialForm(D, N, 1, {(D,): x(0)})  # x1 dy1
        expected = DifferentialForm(D, N, 2, {(0, D): TruncatedPoly.one(D, N)})
        assert de_rham_d(f) == expected

    def test_d_of_constant_area_form(self):
        area = DifferentialForm(D, N, 2, {(0, D): TruncatedPoly.one(D, N)})
        assert de_rham_d(area).is_zero()

    @settings(max_examples=40, deadline=None)
    @given(polys(D, N, with_h=False))
    def test_d_squared_on_functions(self, f):
        form = DifferentialForm.from_poly(f)
        assert de_rham_d(de_rham_d(form)).is_zero()

    @settings(max_examples=30, deadline=None)
    @given(one_forms())
    def test_d_squared_on_one_forms(self, form):
        assert de_rham_d(de_rham_d(form)).is_zero()

    def test_top_degree_raises(self):
        top = DifferentialForm(1, 4, 2, {(0, 1): TruncatedPoly.one(1, 4)})
        with pytest.raises(UsageError):
            de_rham_d(top)

    def test_wedge_standard_area(self):
        dx1 = DifferentialForm.d_coordinate(0, D, N)
        dy1 = DifferentialForm.d_coordinate(D, D, N)
        assert wedge(dx1, dy1) == DifferentialForm(
            D, N, 2, {(0, D): TruncatedPoly.one(D, N)}
        )

    @settings(max_examples=30, deadline=None)
    @given(one_forms())
    def test_wedge_self_annihilates(self, a):
        assert wedge(a, a).is_zero()

    @settings(max_examples=25, deadline=None)
    @given(one_forms(), one_forms())
    def test_wedge_graded_commutative(self, a, b):
        assert wedge(a, b) == wedge(b, a).scaled(-1)

    @settings(max_examples=20, deadline=None)
    @given(one_forms(), one_forms(), one_forms())
    def test_wedge_associative(self, a, b, c):
        assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))

    def test_wedge_degree_overflow(self):
        a = DifferentialForm(1, 4, 2, {(0, 1): TruncatedPoly.one(1, 4)})
        with pytest.raises(UsageError):
            wedge(a, DifferentialForm.d_coordinate(0, 1, 4))

    def test_euler_contraction_identity(self):
        # d(i_E a) + i_E(d a) = (m + k) a on coefficient-homogeneous forms
        form = DifferentialForm(D, N, 1, {(0,): x(0) * y(1), (D,): x(1) * x(1)})
        lhs = de_rham_d(euler_contraction(form)) + euler_contraction(de_rham_d(form))
        assert lhs == form.scaled(2 + 1)


class TestPoisson:
    def test_normalization(self):
        theta = PoissonBivector.standard(D, N)
        one = TruncatedPoly.one(D, N)
        for i in range(D):
            for j in range(D):
                expected = one if i == j else TruncatedPoly.zero(D, N)
                assert poisson_bracket(x(i), y(j), theta) == expected
        assert poisson_bracket(x(0), x(1), theta).is_zero()

    def test_h_input_rejected(self):
        theta = PoissonBivector.standard(D, N)
        with pytest.raises(UsageError):
            poisson_bracket(TruncatedPoly.h(D, N), y(0), theta)

    @settings(max_examples=40, deadline=None)
    @given(polys(D, N, with_h=False), polys(D, N, with_h=False))
    def test_antisymmetry(self, f, g):
        assert standard_poisson(f, g) == -standard_poisson(g, f)

    def test_leibniz_and_jacobi_without_truncation(self):
        # polynomials of low weight so no intermediate overflow occurs
        rng = random.Random(11)
        monos = all_monomials(D, 2)
        deep = 20

        def sample():
            return TruncatedPoly(
                D,
                deep,
                {rng.choice(monos): Fraction(rng.randrange(1, 5)) for _ in range(2)},
            )

        for _ in range(25):
            f, g, k = sample(), sample(), sample()
            assert standard_poisson(f, g * k) == standard_poisson(f, g) * k + g * standard_poisson(f, k)
            jac = (
                standard_poisson(f, standard_poisson(g, k))
                + standard_poisson(g, standard_poisson(k, f))
                + standard_poisson(k, standard_poisson(f, g))
            )
            assert jac.is_zero()

    def test_jacobi_for_nonconstant_closed_bivector(self):
        # Theta from the closed form (1+x1) dx1/\dy1 at d=1: entries (1+x1)^-1
        d, n = 1, 8
        inv = TruncatedPoly.zero(d, n)
        for k in range(n + 1):
            inv = inv + (TruncatedPoly.x(0, d, n) ** k).scaled(Fraction((-1) ** k))
        theta = PoissonBivector(d, n, {(0, 1): inv})
        rng = random.Random(3)
        monos = all_monomials(d, 2)

        def sample():
            return TruncatedPoly(
                d,
                n,
                {rng.choice(monos): Fraction(rng.randrange(1, 4)) for _ in range(2)},
            )

        for _ in range(20):
            f, g, k = sample(), sample(), sample()
            jac = (
                poisson_bracket(f, poisson_bracket(g, k, theta), theta)
                + poisson_bracket(g, poisson_bracket(k, f, theta), theta)
                + poisson_bracket(k, poisson_bracket(f, g, theta), theta)
            )
            # the truncated bivector is only faithful below the cutoff: the
            # weight-N slice of a double bracket sees the discarded tail of
            # theta, so exactness is asserted through weight N-1
            assert jac.truncated(n - 1).is_zero()


class TestSerialization:
    def test_json_roundtrip(self):
        p = x(0) * y(1) + TruncatedPoly.h(D, N).scaled(Fraction(1, 2))
        assert TruncatedPoly.from_json(p.to_json()) == p

    def test_json_sorted_keys(self):
        p = y(1) + x(0) + TruncatedPoly.one(D, N)
        data = p.to_json()["terms"]
        assert data[0][:3] == [[0, 0], [0, 0], 0]  # constant first
        assert [row[3] for row in data] == ["1/1", "1/1", "1/1"]

    def test_str_is_canonical(self):
        # term order is (weight, h-power, lex on exponents): y2 sorts before x1
        p = x(0) - y(1).scaled(Fraction(3, 2))
        assert str(p) == "-3/2*y2 + x1"

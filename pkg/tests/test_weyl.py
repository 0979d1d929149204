"""Weyl algebra: rewriting, star product, iota, the split order-one model.

The normal-ordering oracle is an independent operator representation on
polynomials: x_i acts by multiplication, y_j by -h d/dx_j and h centrally.
These operators satisfy the defining relations, and distinct normal forms act
distinctly, so agreement on a spanning set of polynomials pins the canonical
form without going through the rewriting engine.
"""

import random
from fractions import Fraction

import pytest

from formaldisc.errors import UsageError
from formaldisc.series import Monomial, TruncatedPoly, all_monomials, standard_poisson
from formaldisc.weyl import (
    D1Element,
    TruncationSpec,
    WeylElement,
    center_check,
    commutator,
    d1_bracket,
    d1_product,
    even_lift,
    induced_poisson,
    iota,
    mixed_laplacian,
    mod_h,
    normal_order,
    normal_order_random_strategy,
    star,
)

SPEC = TruncationSpec(d=1, h_order=2, cutoff=8)
SPEC2 = TruncationSpec(d=2, h_order=2, cutoff=6)


def gen(name, spec=SPEC):
    return WeylElement.generator(name, spec)


def random_element(rng, spec, terms=3, max_weight=5):
    data = {}
    for _ in range(terms):
        while True:
            xexp = tuple(rng.randrange(0, 3) for _ in range(spec.d))
            yexp = tuple(rng.randrange(0, 3) for _ in range(spec.d))
            hexp = rng.randrange(0, 2)
            mono = Monomial(xexp, yexp, hexp)
            if mono.weight <= min(max_weight, spec.cutoff) and hexp <= spec.h_order:
                break
        data[mono] = Fraction(rng.randrange(-4, 5) or 1, rng.choice([1, 1, 2, 3]))
    return WeylElement(spec, data)


# ---------------------------------------------------------------------------
# the operator-representation oracle
# ---------------------------------------------------------------------------
# polynomials in x_1..x_d and h are plain dicts {(xexps..., hexp): Fraction}


def _op_x(i, poly, d):
    return {k[:i] + (k[i] + 1,) + k[i + 1 :]: c for k, c in poly.items()}


def _op_y(i, poly, d):
    out = {}
    for k, c in poly.items():
        if k[i] == 0:
            continue
        key = k[:i] + (k[i] - 1,) + k[i + 1 :-1] + (k[-1] + 1,)
        out[key] = out.get(key, Fraction(0)) - c * k[i]
    return {k: c for k, c in out.items() if c != 0}


def _op_h(poly, d):
    return {k[:-1] + (k[-1] + 1,): c for k, c in poly.items()}


def _apply_word(word, poly, d):
    """Act by a word of generators, rightmost letter first."""
    for name in reversed(word):
        if name == "h":
            poly = _op_h(poly, d)
        elif name[0] == "x":
            poly = _op_x(int(name[1:]) - 1, poly, d)
        else:
            poly = _op_y(int(name[1:]) - 1, poly, d)
    return poly


def _apply_element(element, poly, d):
    """Act by a normal form: each monomial as the word x^a y^b h^c."""
    total = {}
    for mono, coeff in element.terms.items():
        word = []
        for i, e in enumerate(mono.xexp):
            word += [f"x{i + 1}"] * e
        for i, e in enumerate(mono.yexp):
            word += [f"y{i + 1}"] * e
        word += ["h"] * mono.hexp
        acted = _apply_word(word, poly, d)
        for k, c in acted.items():
            acc = total.get(k, Fraction(0)) + c * coeff
            if acc == 0:
                total.pop(k, None)
            else:
                total[k] = acc
    return total


class TestNormalOrder:
    def test_yx_rule(self):
        assert star(gen("y1"), gen("x1")) == normal_order(
            ["x1", "y1"], SPEC
        ) - normal_order(["h"], SPEC)

    def test_already_ordered(self):
        assert star(gen("x1"), gen("y1")) == normal_order(["x1", "y1"], SPEC)

    def test_two_step_rewrite(self):
        # y^2 x = x y^2 - 2 h y
        lhs = normal_order(["y1", "y1", "x1"], SPEC)
        rhs = normal_order(["x1", "y1", "y1"], SPEC) - normal_order(
            ["h", "y1", Fraction(2)], SPEC
        )
        assert lhs == rhs

    def test_matrix_representation_oracle(self):
        rng = random.Random(42)
        spec = TruncationSpec(d=2, h_order=6, cutoff=14)  # deep: no truncation
        names = ["x1", "x2", "y1", "y2", "h"]
        for _ in range(30):
            word = [rng.choice(names) for _ in range(rng.randrange(1, 6))]
            element = normal_order(word, spec)
            for probe_exp in [(0, 0), (1, 0), (0, 1), (2, 1), (1, 2)]:
                probe = {probe_exp + (0,): Fraction(1)}
                direct = _apply_word(word, dict(probe), 2)
                via_normal = _apply_element(element, dict(probe), 2)
                assert direct == via_normal, (word, probe_exp)

    def test_random_strategy_confluence(self):
        rng = random.Random(7)
        names = ["x1", "y1", "h"]
        for _ in range(40):
            word = [rng.choice(names) for _ in range(rng.randrange(2, 8))]
            assert normal_order(word, SPEC) == normal_order_random_strategy(
                word, SPEC, rng
            ), word

    def test_scalars_in_words(self):
        assert normal_order([Fraction(1, 2), "x1", 4, "y1"], SPEC) == star(
            gen("x1"), gen("y1")
        ).scaled(2)


class TestStar:
    def test_defining_relations(self):
        h = gen("h", SPEC2)
        for i in range(2):
            for j in range(2):
                c = commutator(gen(f"x{i + 1}", SPEC2), gen(f"y{j + 1}", SPEC2))
                assert c == (h if i == j else WeylElement.zero(SPEC2))
                assert commutator(gen(f"x{i + 1}", SPEC2), gen(f"x{j + 1}", SPEC2)).is_zero()
                assert commutator(gen(f"y{i + 1}", SPEC2), gen(f"y{j + 1}", SPEC2)).is_zero()

    def test_h_central(self):
        rng = random.Random(2)
        h = gen("h")
        for _ in range(10):
            a = random_element(rng, SPEC)
            assert commutator(h, a).is_zero()

    def test_unit(self):
        rng = random.Random(3)
        one = WeylElement.one(SPEC)
        a = random_element(rng, SPEC)
        assert star(a, one) == a and star(one, a) == a

    def test_associative_random(self):
        rng = random.Random(4)
        for _ in range(40):
            a, b, c = (random_element(rng, SPEC) for _ in range(3))
            assert star(star(a, b), c) == star(a, star(b, c))

    def test_commutator_example(self):
        # [x^2, y] = 2 h x
        lhs = commutator(star(gen("x1"), gen("x1")), gen("y1"))
        assert lhs == normal_order(["h", "x1", 2], SPEC)

    def test_jacobi(self):
        rng = random.Random(5)
        for _ in range(15):
            a, b, c = (random_element(rng, SPEC) for _ in range(3))
            jac = (
                commutator(commutator(a, b), c)
                + commutator(commutator(b, c), a)
                + commutator(commutator(c, a), b)
            )
            assert jac.is_zero()

    def test_spec_mismatch(self):
        with pytest.raises(UsageError):
            star(gen("x1", SPEC), gen("x1", SPEC2))


class TestIota:
    def test_generators(self):
        assert iota(gen("h")) == -gen("h")
        assert iota(gen("x1")) == gen("x1")
        assert iota(gen("y1")) == gen("y1")

    def test_reverses_products(self):
        # iota(x y) computed two ways: directly and as iota(y) * iota(x)
        lhs = iota(star(gen("x1"), gen("y1")))
        rhs = star(iota(gen("y1")), iota(gen("x1")))
        assert lhs == rhs == star(gen("x1"), gen("y1")) - gen("h")

    def test_antihomomorphism_random(self):
        rng = random.Random(6)
        for _ in range(30):
            a, b = random_element(rng, SPEC), random_element(rng, SPEC)
            assert iota(star(a, b)) == star(iota(b), iota(a))

    def test_involution_random(self):
        rng = random.Random(7)
        for _ in range(30):
            a = random_element(rng, SPEC)
            assert iota(iota(a)) == a


class TestModHAndBracket:
    def test_mod_h_examples(self):
        assert mod_h(star(gen("x1"), gen("y1")) - gen("h")) == TruncatedPoly(
            1, 8, {Monomial((1,), (1,), 0): Fraction(1)}
        )
        assert mod_h(gen("h")).is_zero()

    def test_mod_h_multiplicative(self):
        rng = random.Random(8)
        for _ in range(25):
            a, b = random_element(rng, SPEC), random_element(rng, SPEC)
            assert mod_h(star(a, b)) == mod_h(a) * mod_h(b)

    def test_mod_h_kernel_exhaustive(self):
        # kernel is exactly the h-divisible terms: monomial basis, weight <= 4
        small = TruncationSpec(1, 2, 4)
        for c in range(3):
            for m in all_monomials(1, 4 - 2 * c):
                mono = Monomial(m.xexp, m.yexp, c)
                if mono.weight > 4:
                    continue
                element = WeylElement(small, {mono: Fraction(1)})
                assert mod_h(element).is_zero() == (c > 0)

    def test_induced_poisson_normalization(self):
        x = TruncatedPoly.x(0, 1, 6)
        y = TruncatedPoly.y(0, 1, 6)
        assert induced_poisson(x, y) == TruncatedPoly.one(1, 6)
        assert induced_poisson(x, x).is_zero()

    def test_induced_poisson_alternating(self):
        f = TruncatedPoly.x(0, 1, 6) * TruncatedPoly.y(0, 1, 6)
        assert induced_poisson(f, f).is_zero()

    def test_induced_poisson_matches_series_kernel(self):
        rng = random.Random(9)
        for _ in range(30):
            f = mod_h(random_element(rng, SPEC2, terms=3, max_weight=4))
            g = mod_h(random_element(rng, SPEC2, terms=3, max_weight=4))
            assert induced_poisson(f, g) == standard_poisson(f, g)

    def test_lift_independence(self):
        # shifting a lift by h * anything cannot change the bracket; emulate
        # by comparing against a direct computation with a perturbed lift
        x = TruncatedPoly.x(0, 1, 6)
        y = TruncatedPoly.y(0, 1, 6)
        inner = TruncationSpec(1, 1, 8)
        lift_x = WeylElement.from_poly(x.lifted(8), inner)
        lift_y = WeylElement.from_poly(y.lifted(8), inner)
        perturbed = lift_x + star(gen("h", inner), random_element(random.Random(1), inner, 2, 3))
        plain = commutator(lift_x, lift_y)
        shifted = commutator(perturbed, lift_y)
        difference = shifted - plain
        # difference is divisible by h^2, so it dies after dividing by h mod h
        assert all(m.hexp >= 2 for m in difference.terms)

    def test_h_input_rejected(self):
        with pytest.raises(UsageError):
            induced_poisson(TruncatedPoly.h(1, 6), TruncatedPoly.x(0, 1, 6))


class TestCenter:
    def test_scalars_central(self):
        h = gen("h")
        assert center_check(star(h, h) + WeylElement.scalar(3, SPEC))

    def test_x_not_central(self):
        assert not center_check(gen("x1"))

    def test_exhaustive_weight_4(self):
        spec = TruncationSpec(1, 2, 4)
        for c in range(3):
            for m in all_monomials(1, 4 - 2 * c):
                mono = Monomial(m.xexp, m.yexp, c)
                element = WeylElement(spec, {mono: Fraction(1)})
                pure_h = not any(mono.xexp) and not any(mono.yexp)
                assert center_check(element) == pure_h, mono


class TestD1Model:
    """The iota-split model of the order-one algebra."""

    def test_even_lift_is_iota_fixed(self):
        spec = TruncationSpec(1, 1, 8)
        f = TruncatedPoly.x(0, 1, 8) ** 2 * TruncatedPoly.y(0, 1, 8)
        assert iota(even_lift(f, spec)) == even_lift(f, spec)

    def test_product_of_coordinates(self):
        x = D1Element.from_function(TruncatedPoly.x(0, 1, 8))
        y = D1Element.from_function(TruncatedPoly.y(0, 1, 8))
        xy = d1_product(x, y)
        yx = d1_product(y, x)
        # they differ by exactly h * {x, y} = h * 1
        assert xy.even == yx.even
        assert xy.odd - yx.odd == TruncatedPoly.one(1, 8)

    def test_unit(self):
        one = D1Element.one(1, 8)
        a = D1Element(
            TruncatedPoly.x(0, 1, 8) * TruncatedPoly.y(0, 1, 8),
            TruncatedPoly.x(0, 1, 8),
        )
        assert d1_product(a, one) == a and d1_product(one, a) == a

    def test_transport_matches_star_on_basis(self):
        # the [DERIVED] oracle fixing the one-half in the product: transport
        # through the eigenspace identification against the star product at
        # h-order 1 on all function pairs of weight <= 6
        spec = TruncationSpec(1, 1, 14)
        monos = all_monomials(1, 6)
        for m1 in monos:
            a = D1Element.from_function(TruncatedPoly(1, 14, {m1: Fraction(1)}))
            wa = a.to_weyl(spec)
            for m2 in monos:
                b = D1Element.from_function(TruncatedPoly(1, 14, {m2: Fraction(1)}))
                assert star(wa, b.to_weyl(spec)) == d1_product(a, b).to_weyl(spec)

    def test_transport_roundtrip(self):
        rng = random.Random(10)
        spec = TruncationSpec(1, 1, 8)
        for _ in range(20):
            w = random_element(rng, spec, terms=3, max_weight=6)
            assert D1Element.from_weyl(w).to_weyl(spec) == w

    def test_bracket_is_h_linear_poisson(self):
        # the commutator-derived bracket of the order-one algebra transported
        # to the split model, against the h-linear Poisson extension
        rng = random.Random(11)
        n = 8
        deep = TruncationSpec(1, 2, n + 2)
        for _ in range(20):
            a = D1Element(
                mod_h(random_element(rng, TruncationSpec(1, 1, n), 2, 4)),
                mod_h(random_element(rng, TruncationSpec(1, 1, n), 2, 4)),
            )
            b = D1Element(
                mod_h(random_element(rng, TruncationSpec(1, 1, n), 2, 4)),
                mod_h(random_element(rng, TruncationSpec(1, 1, n), 2, 4)),
            )
            wa = a.to_weyl(TruncationSpec(1, 1, n + 2)).respec(deep)
            wb = b.to_weyl(TruncationSpec(1, 1, n + 2)).respec(deep)
            comm = commutator(wa, wb)
            divided = {}
            for mono, coeff in comm.terms.items():
                assert mono.hexp >= 1
                lowered = Monomial(mono.xexp, mono.yexp, mono.hexp - 1)
                if lowered.hexp <= 1 and lowered.weight <= n:
                    divided[lowered] = coeff
            transported = D1Element.from_weyl(
                WeylElement(TruncationSpec(1, 1, n), divided)
            )
            expected = d1_bracket(a, b)
            assert transported.even == expected.even.truncated(n)
            assert transported.odd == expected.odd.truncated(n)

    def test_laplacian_correction(self):
        f = TruncatedPoly.x(0, 1, 8) * TruncatedPoly.y(0, 1, 8)
        assert mixed_laplacian(f) == TruncatedPoly.one(1, 8)

"""Expression grammar, evaluation, CLI dispatch and report format."""

import json
from fractions import Fraction

import pytest

from formaldisc.cli import main
from formaldisc.errors import UsageError
from formaldisc.exprs import (
    EvalContext,
    ParseError,
    eval_form,
    eval_poly,
    eval_weyl,
    evaluate,
    parse,
    to_text,
)
from formaldisc.series import Monomial, TruncatedPoly
from formaldisc.weyl import TruncationSpec, WeylElement, star


CTX = EvalContext(d=2, cutoff=6)


class TestGrammar:
    def test_poly_example(self):
        value = eval_poly("x1*y1 + 1/2*h", CTX)
        expected = TruncatedPoly(
            2,
            6,
            {
                Monomial((1, 0), (1, 0), 0): Fraction(1),
                Monomial((0, 0), (0, 0), 1): Fraction(1, 2),
            },
        )
        assert value == expected

    def test_form_example(self):
        value = eval_form("(1+x1) * dx1 /\\ dy1", CTX)
        assert value.degree == 2
        one_plus_x = TruncatedPoly.one(2, 6) + TruncatedPoly.x(0, 2, 6)
        assert value.component((0, 2)) == one_plus_x

    def test_unknown_variable(self):
        with pytest.raises(UsageError, match="x3"):
            eval_poly("x3", CTX)

    def test_syntax_error_position(self):
        with pytest.raises(ParseError) as err:
            parse("x1 + + y1")
        assert err.value.pos == 5

    def test_precedence_pow_over_mul(self):
        assert eval_poly("2*x1^2", CTX) == (TruncatedPoly.x(0, 2, 6) ** 2).scaled(2)

    def test_precedence_wedge_looser_than_mul(self):
        a = eval_form("x1 * dx1 /\\ dy1", CTX)
        b = eval_form("(x1 * dx1) /\\ dy1", CTX)
        assert a == b

    def test_precedence_wedge_tighter_than_plus(self):
        value = eval_form("dx1 /\\ dy1 + dx2 /\\ dy2", CTX)
        assert value.degree == 2
        assert len(value.components) == 2

    def test_unary_minus(self):
        assert eval_poly("-x1 + x1", CTX).is_zero()
        assert eval_poly("-x1^2", CTX) == -(TruncatedPoly.x(0, 2, 6) ** 2)

    def test_rational_literals(self):
        assert eval_poly("3/4", CTX) == TruncatedPoly.constant(Fraction(3, 4), 2, 6)
        with pytest.raises(ParseError):
            parse("1/0")

    def test_division_of_symbols_rejected(self):
        with pytest.raises(ParseError):
            parse("x1 / 2")

    def test_mixed_addition_rejected(self):
        with pytest.raises(UsageError):
            evaluate(parse("x1 + dx1"), CTX)

    def test_roundtrip_print_parse(self):
        texts = [
            "x1*y1 + 1/2*h",
            "(1+x1) * dx1 /\\ dy1",
            "-x1^2 + 2/3*y2 - h",
            "x1 * (y1 + y2) /\\ dx2",
        ]
        for text in texts:
            tree = parse(text)
            printed = to_text(tree)
            assert evaluate(parse(printed), CTX) == evaluate(tree, CTX), printed


class TestWeylWords:
    def test_left_to_right_word(self):
        spec = TruncationSpec(1, 2, 6)
        value = eval_weyl("y1*x1*h", spec)
        x = WeylElement.generator("x1", spec)
        y = WeylElement.generator("y1", spec)
        h = WeylElement.generator("h", spec)
        assert value == star(star(y, x), h)

    def test_powers_are_star_powers(self):
        spec = TruncationSpec(1, 2, 6)
        assert eval_weyl("(x1 + y1)^2", spec) == star(
            eval_weyl("x1 + y1", spec), eval_weyl("x1 + y1", spec)
        )

    def test_forms_rejected(self):
        with pytest.raises(UsageError):
            eval_weyl("dx1", TruncationSpec(1, 2, 6))


class TestCLI:
    def test_weyl_comm(self, capsys):
        assert main(["weyl", "comm", "x1", "y1", "--d", "1", "--p", "2", "--N", "6"]) == 0
        assert capsys.readouterr().out.strip() == "h"

    def test_weyl_iota(self, capsys):
        assert main(["weyl", "iota", "h", "--d", "1"]) == 0
        assert capsys.readouterr().out.strip() == "-h"

    def test_poisson_standard(self, capsys):
        assert main(["poisson", "x1^2", "y1^2", "--d", "1", "--N", "6"]) == 0
        assert capsys.readouterr().out.strip() == "4*x1*y1"

    def test_poisson_with_form(self, capsys):
        code = main(
            ["poisson", "x1", "y1", "--form", "(1+x1) * dx1 /\\ dy1", "--d", "1", "--N", "4"]
        )
        assert code == 0
        out = capsys.readouterr().out.strip()
        assert out == "1 - x1 + x1^2 - x1^3 + x1^4"

    def test_unknown_variable_is_exit_2(self, capsys):
        assert main(["poisson", "x3", "y1", "--d", "2", "--N", "4"]) == 2

    def test_tower_check(self, capsys, tmp_path):
        out_file = tmp_path / "report.json"
        code = main(
            ["tower", "check", "--d", "1", "--p", "1", "--N", "4", "--json", str(out_file)]
        )
        assert code == 0
        payload = json.loads(out_file.read_text())
        assert payload["schema"] == 1
        assert all(c["status"] == "pass" for c in payload["checks"])

    def test_tower_fault_injection(self, capsys):
        code = main(["tower", "check", "--d", "1", "--p", "1", "--N", "4", "--inject-fault"])
        assert code == 1
        out = capsys.readouterr().out
        assert "FAIL" in out and "witness" in out

    def test_cohomology_dims(self, capsys, tmp_path):
        out_file = tmp_path / "dims.json"
        code = main(
            [
                "cohomology", "dims", "--algebra", "H", "--d", "1", "--N", "5",
                "--module", "trivial", "--degrees", "0,1", "--json", str(out_file),
            ]
        )
        assert code == 0
        payload = json.loads(out_file.read_text())
        assert payload["dimensions"]["H^0(w=0)"] == 1

    def test_cohomology_omega(self, capsys):
        code = main(["cohomology", "class", "--which", "omega", "--d", "1", "--N", "4"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["nonzero"] is True
        assert payload["weight"] == -2

    def test_darboux_normalize_prints_zero_residual(self, capsys):
        code = main(
            ["darboux", "normalize", "--form", "(1+x1) * dx1 /\\ dy1", "--d", "1", "--N", "8"]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "verification residual: 0" in out

    def test_darboux_transport(self, capsys):
        code = main(
            [
                "darboux", "transport", "--form", "dx1 /\\ dy1",
                "--a", "x1", "--b", "y1", "--d", "1", "--p", "2", "--N", "6",
            ]
        )
        assert code == 0
        assert capsys.readouterr().out.strip() == "x1*y1"

    def test_verify_suite_deterministic(self, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        for path in (first, second):
            assert (
                main(
                    ["verify", "weyl", "--d", "1", "--p", "1", "--N", "4",
                     "--seed", "5", "--json", str(path)]
                )
                == 0
            )
        a = json.loads(first.read_text())
        b = json.loads(second.read_text())
        a.pop("duration_s"), b.pop("duration_s")
        assert a == b
        assert a["seed"] == 5

    def test_verify_unknown_suite_is_exit_2(self):
        with pytest.raises(SystemExit) as err:
            main(["verify", "nonsense"])
        assert err.value.code == 2

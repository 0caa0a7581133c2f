import numpy as np
import pytest

from imexbdf.errors import ConfigError
from imexbdf.expressions import compile_field


class TestAccepts:
    def test_coefficient_field(self):
        expr = compile_field("1 + 0.5*sin(x)", ("x", "t"))
        x = np.linspace(0.0, 1.0, 7)
        np.testing.assert_allclose(expr(x, 0.3), 1.0 + 0.5 * np.sin(x))

    def test_space_time_field(self):
        expr = compile_field("exp(-t)*sin(pi*x)", ("x", "t"))
        x = np.linspace(0.0, 1.0, 5)
        np.testing.assert_allclose(
            expr(x, 0.25), np.exp(-0.25) * np.sin(np.pi * x), atol=1e-15
        )

    def test_constants_and_power(self):
        expr = compile_field("e**2 + x**3 / 2 - (-x)", ("x", "t"))
        assert expr(2.0, 0.0) == pytest.approx(np.e**2 + 4.0 + 2.0)

    def test_two_space_variables(self):
        expr = compile_field("sin(x)*cos(y) + t", ("x", "y", "t"))
        assert expr(1.0, 2.0, 0.5) == pytest.approx(np.sin(1.0) * np.cos(2.0) + 0.5)

    def test_abs_function(self):
        expr = compile_field("abs(x)", ("x", "t"))
        assert expr(-3.0, 0.0) == 3.0

    def test_scalar_constant_broadcasts_later(self):
        expr = compile_field("0", ("x", "t"))
        assert expr(np.zeros(4), 0.0) == 0


class TestTimeDependence:
    def test_static_field(self):
        assert not compile_field("1 + 0.5*sin(x)", ("x", "t")).time_dependent

    def test_time_dependent_field(self):
        assert compile_field("sin(x)*cos(t)", ("x", "t")).time_dependent

    def test_t_only_inside_call(self):
        assert compile_field("exp(-t)", ("x", "t")).time_dependent


class TestRejects:
    @pytest.mark.parametrize(
        "text",
        [
            "",
            "   ",
            "import os",
            "__import__('os')",
            "x.real",
            "unknown_name",
            "f(x)",
            "sin(x, 1)",
            "sin()",
            "x if t else 1",
            "lambda: 1",
            "[1, 2]",
            "x < 1",
            "x; t",
            "open('f')",
            "1j*x",
            "sin",
        ],
    )
    def test_rejected(self, text):
        with pytest.raises(ConfigError):
            compile_field(text, ("x", "t"))

    def test_message_carries_position(self):
        with pytest.raises(ConfigError, match=r"line \d+, column \d+"):
            compile_field("1 + secret", ("x", "t"))

    def test_y_rejected_in_one_dimension(self):
        with pytest.raises(ConfigError, match="y"):
            compile_field("sin(y)", ("x", "t"))

    def test_arity_mismatch_at_call_time(self):
        expr = compile_field("sin(x)", ("x", "t"))
        with pytest.raises(ConfigError):
            expr(1.0)

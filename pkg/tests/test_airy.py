import mpmath
import numpy as np
import pytest

from hbench.airy import AiryDomainError, airy_ai, airy_aip, airy_first_zero

mpmath.mp.dps = 30


class TestAgainstMpmath:
    @pytest.mark.parametrize("x", [-15.0, -12.3, -9.0, -8.99, -5.5, -2.338, -1.0, 0.0, 0.7, 3.3, 4.99, 5.0, 5.01, 7.5, 10.0])
    def test_values(self, x):
        assert airy_ai(x) == pytest.approx(float(mpmath.airyai(x)), abs=1e-11, rel=1e-10)
        assert airy_aip(x) == pytest.approx(float(mpmath.airyai(x, derivative=1)), abs=1e-11, rel=1e-10)

    def test_dense_grid(self):
        xs = np.linspace(-15, 10, 301)
        ref = np.array([float(mpmath.airyai(x)) for x in xs])
        assert np.max(np.abs(airy_ai(xs) - ref)) < 1e-11

    def test_first_zero(self):
        ref = float(mpmath.airyaizero(1))
        assert airy_first_zero() == pytest.approx(ref, abs=1e-12)
        assert abs(airy_first_zero() + 2.338107) < 1e-6


class TestStructure:
    def test_differential_equation(self):
        # Ai'' = x Ai, checked by central differences of Ai'
        h = 1e-5
        for x in (-7.0, -2.0, 0.5, 4.0, 8.0):
            d2 = (airy_aip(x + h) - airy_aip(x - h)) / (2 * h)
            assert d2 == pytest.approx(x * airy_ai(x), abs=1e-8)

    def test_wronskian_with_zero_values(self):
        assert airy_ai(0.0) == pytest.approx(0.355028053887817, abs=1e-15)
        assert airy_aip(0.0) == pytest.approx(-0.258819403792807, abs=1e-15)

    @pytest.mark.parametrize("x", [-15.01, 10.5, float("nan")])
    def test_domain(self, x):
        with pytest.raises(AiryDomainError):
            airy_ai(x)

    def test_array_shape(self):
        assert airy_ai(np.zeros((2, 3))).shape == (2, 3)

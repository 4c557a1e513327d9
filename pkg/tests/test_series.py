"""Rational functions, Laurent expansions, residues and the Schwarzian.

Reference values marked "sympy" were produced once with sympy and frozen here.
"""
import numpy as np
import pytest

from bryantflux.errors import (
    ConstantFunction,
    DivisionByZeroFunction,
    WeightMismatch,
    ZeroFunction,
)
from bryantflux.series import (
    INF,
    Polynomial,
    PowerForm,
    RationalFunction as R,
    derivative,
    expand_at,
    field_ops,
    order_at,
    residue,
    schwarzian,
)

z = R.z()
one = R.const(1)


def kumamoto_G():
    return ((z + 1) * (z * z - z * 4 + 1)) / (z - 1) ** 3


def random_rational(rng, weight=0, max_degree=3):
    zeros = rng.normal(size=rng.integers(0, max_degree + 1)) * 1.5 + 1j * rng.normal(size=1)
    poles = rng.normal(size=rng.integers(1, max_degree + 1)) * 1.5 + 1j * rng.normal(size=1)
    c = complex(rng.normal(), rng.normal())
    return R._make(c, [(a, 1) for a in zeros] + [(b, -1) for b in poles], weight)


def sample(rng, f, n=10):
    pts = []
    avoid = [a for a, _ in f.factors]
    while len(pts) < n:
        s = complex(*rng.uniform(-2, 2, 2))
        if all(abs(s - a) > 0.1 for a in avoid):
            pts.append(s)
    return np.array(pts)


class TestPolynomial:
    def test_trailing_zeros_stripped(self):
        p = Polynomial((1, 2, 0, 0))
        assert p.degree == 1
        assert p.coeffs[-1] != 0

    def test_zero_polynomial(self):
        p = Polynomial((0,))
        assert p.is_zero
        assert p.degree == -1

    def test_arithmetic_and_evaluation(self):
        p = Polynomial((1, 1))
        q = Polynomial((-1, 1))
        assert np.allclose((p * q).arr, [-1, 0, 1])
        assert (p + q)(2.0) == pytest.approx(4.0)

    def test_taylor_shift(self):
        p = Polynomial((1, 0, 1))
        assert np.allclose(p.taylor(1.0), [2, 2, 1])


class TestFieldOps:
    def test_add_functions(self):
        f = field_ops(z, one, "add")
        assert f(3.0) == pytest.approx(4.0)
        assert f.weight == 0

    def test_mul_weights_add(self):
        f = field_ops((1 / z).with_weight(1), z * z, "mul")
        assert f.weight == 1
        assert f(2.5) == pytest.approx(2.5)
        assert f.factors == ((0j, 1),)

    def test_add_across_weights(self):
        with pytest.raises(WeightMismatch):
            field_ops(z, z.with_weight(1), "add")

    def test_division_by_zero_function(self):
        with pytest.raises(DivisionByZeroFunction):
            field_ops(z, z - z, "div")

    def test_division_weights_subtract(self):
        f = field_ops(z.with_weight(2), z.with_weight(1), "div")
        assert f.weight == 1
        assert f.is_constant

    def test_exact_cancellation(self):
        f = (z * z - 1) / (z - 1)
        assert f.factors == ((-1 + 0j, 1),)

    def test_sum_cancels_to_zero(self):
        f = 1 / (z - 1) - 1 / (z - 1)
        assert f.is_zero

    def test_pointwise_against_numpy(self, rng):
        for _ in range(20):
            a, b = random_rational(rng), random_rational(rng)
            pts = sample(rng, a * b)
            for op, fn in (("add", np.add), ("sub", np.subtract), ("mul", np.multiply),
                           ("div", np.divide)):
                got = field_ops(a, b, op)(pts)
                want = fn(a(pts), b(pts))
                assert np.allclose(got, want, rtol=1e-9, atol=1e-9)

    def test_num_den_reduced(self):
        G = kumamoto_G()
        assert G.num.degree == 3
        assert G.den.degree == 3
        assert np.allclose(G.den.roots(), 1, atol=1e-6)


class TestDerivative:
    def test_square(self):
        f = derivative(z * z)
        assert f.weight == 1
        assert f(1.5) == pytest.approx(3.0)

    def test_constant(self):
        assert derivative(R.const(5)).is_zero

    def test_requires_function(self):
        with pytest.raises(WeightMismatch):
            derivative(z.with_weight(1))

    def test_kumamoto_closed_form(self):
        # sympy: 12 z / (z - 1)^4
        dG = derivative(kumamoto_G())
        pts = np.array([0.3 + 0.2j, -1.1j, 2.0])
        assert np.allclose(dG(pts), 12 * pts / (pts - 1) ** 4, rtol=1e-10)

    def test_finite_differences(self, rng):
        fs = [kumamoto_G()] + [random_rational(rng) for _ in range(5)]
        h = 1e-6
        for f in fs:
            pts = sample(rng, f)
            fd = (f(pts + h) - f(pts - h)) / (2 * h)
            assert np.allclose(derivative(f)(pts), fd, rtol=1e-6, atol=1e-6)


class TestExpansion:
    def test_kumamoto_hopf_at_one(self):
        # sympy: 2/u^2 - 2/u + 2 - 2u + ...
        Q = (R.const(2) / (z * (z - 1) ** 2)).with_weight(2)
        e = expand_at(Q, 1, (-2, 0))
        assert e[-2] == pytest.approx(2)
        assert e[-1] == pytest.approx(-2)
        assert e[0] == pytest.approx(2)
        assert e.weight == 2

    def test_kumamoto_hopf_at_infinity(self):
        # sympy, z = 1/w, dz^2 = dw^2 / w^4:  2/w + 4 + 6w + ...
        Q = (R.const(2) / (z * (z - 1) ** 2)).with_weight(2)
        e = expand_at(Q, INF, (-2, 1))
        assert abs(e[-2]) < 1e-12
        assert e[-1] == pytest.approx(2)
        assert e[0] == pytest.approx(4)
        assert e[1] == pytest.approx(6)

    def test_identity_at_zero(self):
        e = expand_at(z, 0, (-1, 1))
        assert e.coeffs == (0j, 0j, 1 + 0j)
        assert not e.truncated

    def test_function_at_infinity(self):
        # sympy: (2z^2 + 1)/(z^3 - z + 2) = 2w + 3w^3 - 4w^4 + ...
        h = (z * z * 2 + 1) / (z ** 3 - z + 2)
        e = expand_at(h, INF, (0, 4))
        assert np.allclose(e.coeffs, [0, 2, 0, 3, -4], atol=1e-12)
        assert e.truncated

    def test_kumamoto_G_taylor(self):
        # sympy: -1 + 6z^2 + 16z^3 at 0, and 1 - 6w^2 - 16w^3 at infinity
        G = kumamoto_G()
        assert np.allclose(expand_at(G, 0, (0, 3)).coeffs, [-1, 0, 6, 16], atol=1e-10)
        assert np.allclose(expand_at(G, INF, (0, 3)).coeffs, [1, 0, -6, -16], atol=1e-10)

    def test_zero_function_expansion(self):
        e = expand_at(z - z, 0, (-1, 2))
        assert e.coeffs == (0j,) * 4

    def test_leading_coefficient_nonzero(self, rng):
        for _ in range(30):
            f = random_rational(rng)
            for p in [a for a, _ in f.factors] + [0.3, INF]:
                k = order_at(f, p)
                assert abs(expand_at(f, p)[k]) > 1e-9

    def test_chart_change_round_trip(self, rng):
        """Expanding at infinity equals expanding the pulled-back data at 0."""
        flip = np.array([[0, 1], [1, 0]])
        for weight in (0, 1, 2):
            for _ in range(10):
                f = random_rational(rng, weight)
                direct = expand_at(f, INF, (-4, 6))
                moved = expand_at(f.pullback(flip), 0, (-4, 6))
                assert np.allclose(direct.coeffs, moved.coeffs, atol=1e-10, rtol=1e-10)


class TestOrder:
    def test_gauss_map_of_catenoid_cousin(self):
        assert order_at(z, 0) == 1

    def test_dual_form_of_catenoid_cousin(self):
        omega = (R.const(0.75) / (z * z)).with_weight(1)
        assert order_at(omega, 0) == -2

    def test_at_infinity(self):
        assert order_at(1 / (z - 1) ** 3, INF) == 3

    def test_forms_at_infinity(self):
        assert order_at(one.with_weight(1), INF) == -2
        assert order_at(one.with_weight(2), INF) == -4

    def test_zero_function(self):
        with pytest.raises(ZeroFunction):
            order_at(z - z, 0)


class TestResidue:
    def test_simple_pole(self):
        assert residue((1 / z).with_weight(1), 0) == pytest.approx(1)

    def test_catenoid_entry(self):
        mu = 2
        form = (R.const((mu * mu - 1) / 4) / z).with_weight(1)
        assert residue(form, 0) == pytest.approx(0.75)

    def test_double_pole_no_residue(self):
        assert residue((1 / (z * z)).with_weight(1), 0) == 0

    def test_requires_one_form(self):
        with pytest.raises(WeightMismatch):
            residue(1 / z, 0)

    def test_against_sympy(self):
        # sympy: residues 4/9 at 1, 5/9 at -2, -1 at infinity
        f = ((z * z + 1) / ((z - 1) ** 2 * (z + 2))).with_weight(1)
        assert residue(f, 1) == pytest.approx(4 / 9)
        assert residue(f, -2) == pytest.approx(5 / 9)
        assert residue(f, INF) == pytest.approx(-1)

    def test_complex_coefficients_against_sympy(self):
        # sympy: 2.23532089212563 - 1.24169321802458i
        f = ((z ** 3 * 3 - z * 2 + 1j) / ((z - 0.5) ** 3 * (z + (1 + 1j)))).with_weight(1)
        assert residue(f, 0.5) == pytest.approx(2.23532089212563 - 1.24169321802458j, rel=1e-12)

    def test_global_residue_theorem(self, rng):
        for _ in range(100):
            f = R._make(complex(rng.normal(), rng.normal()),
                        [(complex(*rng.normal(size=2)), int(m))
                         for m in rng.choice([-3, -2, -1, 1, 2], size=rng.integers(1, 5))], 1)
            total = sum(residue(f, p) for p, _ in f.poles())
            if not any(p is INF for p, _ in f.poles()):
                total += residue(f, INF)
            assert abs(total) <= 1e-10 * max(1.0, abs(f.const_factor))


class TestSchwarzian:
    def test_identity(self):
        assert schwarzian(z).is_zero

    def test_mobius(self):
        assert schwarzian((z * 2 + 1) / (z * 3 - 1)).is_zero

    def test_constant(self):
        with pytest.raises(ConstantFunction):
            schwarzian(R.const(3))

    def test_requires_function(self):
        with pytest.raises(WeightMismatch):
            schwarzian(z.with_weight(1))

    @pytest.mark.parametrize("mu", [0.5, 2.0, 3.0])
    def test_power_family(self, mu):
        g = PowerForm.monomial(1, mu)
        q = (schwarzian(g) - schwarzian(z)) * 0.5
        pts = np.array([0.7 + 0.1j, 1.3 - 0.4j, -0.2 + 0.9j])
        assert np.allclose(q(pts), (1 - mu ** 2) / (4 * pts ** 2), rtol=1e-12)
        assert q.weight == 2

    def test_perturbed_cousin_map(self):
        # sympy: S(z + z^2/2) = -3/(2 (z+1)^2)
        S = schwarzian(z + z * z * 0.5)
        pts = np.array([0.4 + 0.3j, -2.0 + 0.5j])
        assert np.allclose(S(pts), -1.5 / (pts + 1) ** 2)

    def test_kumamoto_exact(self):
        # sympy: (S(z^2) - S(G))/2 = 2/(z (z-1)^2)
        q = (schwarzian(z * z) - schwarzian(kumamoto_G())) * 0.5
        want = (R.const(2) / (z * (z - 1) ** 2))
        assert len(q.factors) == 2
        pts = np.array([0.3 + 0.3j, 2.0 - 1.0j, -0.5j])
        assert np.allclose(q(pts), want(pts), rtol=1e-10)

    def test_mobius_invariance(self, rng):
        for _ in range(20):
            f = random_rational(rng)
            M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            Sf = schwarzian(f)
            Sg = schwarzian(f.compose_mobius(M))
            pts = sample(rng, f * Sf * Sg)
            assert np.allclose(Sg(pts), Sf(pts), rtol=1e-9, atol=1e-9)


class TestPowerForm:
    def test_single_valued_collapses(self):
        assert isinstance(PowerForm.monomial(1, 2.0) * one, R)

    def test_non_integer_stays(self):
        f = PowerForm.monomial(1, 0.5)
        assert not f.is_single_valued
        assert f(4.0) == pytest.approx(2.0)

    def test_half_integer_product_becomes_rational(self):
        g = PowerForm.monomial(1, 0.5)
        form = (g * g) * (1 / (z * z)).with_weight(1)
        assert isinstance(form, R)
        assert residue(form, 0) == pytest.approx(1)

    def test_derivative(self):
        d = PowerForm.monomial(2, 1.5).derivative()
        assert d.weight == 1
        assert d(4.0) == pytest.approx(3 * 2.0)

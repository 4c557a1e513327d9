import numpy as np
import pytest

from bryantflux.cli import format_point
from bryantflux.cmc import SurfaceData
from bryantflux.ends import (
    EndAnalysis,
    EndType,
    classify_end,
    direct_w_coefficients,
    flux_nonvanishing_predicate,
    log_term_condition,
    normalize_at_end,
    w_coefficients,
)
from bryantflux.errors import (
    DegenerateNormalization,
    InconsistentEndData,
    IrregularEnd,
    NotTypeII,
    UnknownEnd,
    UnsupportedMultiplicity,
)
from bryantflux.instances import random_type_one, random_type_two
from bryantflux.series import INF, RationalFunction as R, order_at

from conftest import example

z = R.z()


def type_two(qm1, q0, w, m, G_hat=(1, 0)):
    return EndAnalysis(0, True, EndType.TYPE_II, (0j, qm1, q0), l=m + 1, k=-m - 1, m=m,
                       w_coeffs=tuple(w), G_hat=G_hat)


class TestClassify:
    def test_kumamoto(self, kumamoto):
        types = {format_point(p): classify_end(kumamoto, p).end_type for p in kumamoto.ends}
        assert types == {"0": EndType.TYPE_II, "1": EndType.TYPE_I, "inf": EndType.TYPE_II}

    def test_kumamoto_coefficients(self, kumamoto):
        # sympy: Q = 2/w^2 - 2/w + ... at 1, and 2/w + 4 + ... at infinity
        at1 = classify_end(kumamoto, 1)
        assert np.allclose(at1.q_coeffs, (2, -2, 2))
        at0 = classify_end(kumamoto, 0)
        assert at0.q_coeffs[1] == pytest.approx(2)
        inf = classify_end(kumamoto, INF)
        assert np.allclose(inf.q_coeffs, (0, 2, 4), atol=1e-12)

    @pytest.mark.parametrize("mu", [0.5, 2.0, 3.0])
    def test_catenoid_cousin(self, mu):
        e = classify_end(example("catenoid-cousin", mu=mu), 0)
        assert e.end_type is EndType.TYPE_I
        assert e.q_coeffs[0] == pytest.approx((1 - mu * mu) / 4)
        assert e.flux_nonzero_predicted is True

    def test_unknown_end(self, catenoid):
        with pytest.raises(UnknownEnd):
            classify_end(catenoid, 5)

    def test_irregular(self):
        data = SurfaceData(z, (1 / z ** 3).with_weight(2), (0, INF))
        e = classify_end(data, 0)
        assert not e.regular
        assert e.end_type is EndType.IRREGULAR
        assert e.pole_order_Q == 3
        with pytest.raises(IrregularEnd):
            flux_nonvanishing_predicate(e)

    def test_regular_pole_order_bound(self, builtins):
        for data in builtins:
            for p in data.ends:
                e = classify_end(data, p)
                assert e.regular and e.pole_order_Q <= 2


class TestNormalize:
    def test_catenoid_already_normalized(self, catenoid):
        e = classify_end(catenoid, 0)
        assert (e.l, e.k, e.m) == (1, -2, 1)
        assert e.normalization.kind == "identity"

    def test_perturbed_cousin(self, perturbed):
        e = classify_end(perturbed, 0)
        assert e.l == 1
        assert e.G_hat[0] == pytest.approx(1)
        assert e.G_hat[1] == pytest.approx(0.5)

    def test_pole_of_G_inverted(self, catenoid):
        ne = normalize_at_end(catenoid, INF)
        assert ne.normalization.kind == "inversion"
        assert order_at(ne.G, 0) > 0

    def test_translation(self, kumamoto):
        ne = normalize_at_end(kumamoto, 0)
        assert ne.normalization.kind == "translation"
        assert ne.normalization.shift == pytest.approx(-1)
        # sympy: G = -1 + 6 z^2 + 16 z^3 near 0
        assert order_at(ne.G, 0) == 2

    def test_normalization_is_unimodular(self, kumamoto):
        for p in kumamoto.ends:
            M = normalize_at_end(kumamoto, p).normalization.matrix
            assert np.linalg.det(M) == pytest.approx(1)


class TestWCoefficients:
    def test_direct_read(self):
        omega = ((z * z * 5 + z * 3 + 1) / (z * z)).with_weight(1)
        assert np.allclose(direct_w_coefficients(omega), (1, 3, 5))

    def test_synthetic_pair_is_type_one(self):
        omega = ((z * z * 5 + z * 3 + 1) / (z * z)).with_weight(1)
        Q = -(omega * z.derivative())
        assert classify_end(SurfaceData(z, Q, (0, INF)), 0).end_type is EndType.TYPE_I
        with pytest.raises(NotTypeII):
            w_coefficients(z, omega, Q)

    def test_inconsistent_pair(self):
        omega = ((z + 1) / (z * z)).with_weight(1)
        G = z * z
        Q = -(omega * G.derivative()) + R.const(0.5, 2)
        with pytest.raises(InconsistentEndData):
            w_coefficients(G, omega, Q)

    def test_round_trip(self, rng):
        for m in (1, 2):
            inst = random_type_two(rng, m, move=False)
            ne = normalize_at_end(inst.data, 0)
            w = w_coefficients(ne.G, ne.omega, ne.Q)
            assert np.allclose(w, inst.w[:3], rtol=1e-9, atol=1e-9)

    def test_zero_hopf(self):
        with pytest.raises(DegenerateNormalization):
            w_coefficients(z, R.const(0, 1), R.const(0, 2))

    def test_unnormalized(self):
        omega = (1 / (z * z)).with_weight(1)
        with pytest.raises(DegenerateNormalization):
            w_coefficients(z + 1, omega, -(omega * z.derivative()))


class TestLogTerm:
    def test_m1_holds(self):
        assert log_term_condition(type_two(2, 0, (1, -2, 0), 1))

    def test_m1_fails(self):
        assert not log_term_condition(type_two(2, 0, (1, 0, 0), 1))

    def test_m2_holds(self):
        assert log_term_condition(type_two(0, -4, (1, 0, 1), 2))

    def test_m2_fails(self):
        assert not log_term_condition(type_two(0, -4, (1, 0, 2), 2))

    def test_unsupported_multiplicity(self):
        with pytest.raises(UnsupportedMultiplicity):
            log_term_condition(type_two(0, 1, (1, 0, 0), 3))

    def test_type_one_rejected(self, catenoid):
        with pytest.raises(NotTypeII):
            log_term_condition(classify_end(catenoid, 0))

    def test_generated_instances_are_log_free(self, rng):
        for m in (1, 2):
            for _ in range(10):
                inst = random_type_two(rng, m)
                e = classify_end(inst.data, inst.end)
                assert e.m == m
                assert e.log_term_vanishes is True


class TestPredicate:
    def test_type_one(self, catenoid):
        assert flux_nonvanishing_predicate(classify_end(catenoid, 0))

    def test_kumamoto_origin(self, kumamoto):
        e = classify_end(kumamoto, 0)
        assert e.m == 1
        assert flux_nonvanishing_predicate(e)

    def test_embedded_holomorphic_end(self, rng):
        inst = random_type_two(rng, 1, l=3)
        e = classify_end(inst.data, inst.end)
        assert abs(e.q_coeffs[0]) < 1e-9 and abs(e.q_coeffs[1]) < 1e-9
        assert flux_nonvanishing_predicate(e) is False

    def test_m2_branches(self):
        assert flux_nonvanishing_predicate(type_two(0, 1, (1, 0, 0), 2))
        assert not flux_nonvanishing_predicate(type_two(0, 0, (1, 0, 0), 2))
        # 4 q0 - 4 (g1/g0) q_-1 + q_-1^2 = 0 - 4 * 0.5 * 2 + 4 = 0
        assert not flux_nonvanishing_predicate(type_two(2, 0, (1, 0, 0), 2, G_hat=(1, 0.5)))
        assert flux_nonvanishing_predicate(type_two(2, 1, (1, 0, 0), 2, G_hat=(1, 0.5)))
        assert flux_nonvanishing_predicate(type_two(2, 0, (1, 0, 0), 2, G_hat=(1, 0)))

    def test_m3_unsupported(self):
        with pytest.raises(UnsupportedMultiplicity):
            flux_nonvanishing_predicate(type_two(0, 1, (1, 0, 0), 3))


class TestInvariants:
    def test_chart_invariance_at_infinity(self, builtins):
        flip = np.array([[0, 1], [1, 0]])
        for data in builtins:
            moved = SurfaceData(data.G.pullback(flip), data.Q.pullback(flip),
                                tuple(INF if p == 0 else 0 if p is INF else 1 / p for p in data.ends))
            a = classify_end(data, INF)
            b = classify_end(moved, 0)
            assert a.end_type is b.end_type
            assert (a.l, a.k, a.m) == (b.l, b.k, b.m)
            assert np.allclose(a.q_coeffs, b.q_coeffs, atol=1e-9)
            assert np.allclose(a.w_coeffs, b.w_coeffs, atol=1e-9)
            assert np.allclose(a.G_hat, b.G_hat, atol=1e-9)
            assert a.flux_nonzero_predicted == b.flux_nonzero_predicted

    def test_type_one_orders(self, rng):
        for _ in range(30):
            data, p = random_type_one(rng)
            e = classify_end(data, p)
            assert e.end_type is EndType.TYPE_I
            assert e.k + e.l == -1
            assert e.k + 1 < 0
            assert abs(e.w_coeffs[0]) > 1e-9

    def test_orders_on_complete_ends(self, rng, builtins):
        cases = [(data, p) for data in builtins for p in data.ends]
        cases += [(inst.data, inst.end) for inst in
                  (random_type_two(rng, int(m)) for m in rng.integers(1, 3, 20))]
        for data, p in cases:
            e = classify_end(data, p)
            assert e.k + 1 < 0
            if e.end_type is EndType.TYPE_I:
                assert e.k + e.l == -1

    def test_m1_predicate_iff_q_holomorphic(self, rng):
        for _ in range(30):
            inst = random_type_two(rng, 1)
            e = classify_end(inst.data, inst.end)
            scale = max(abs(q) for q in e.q_coeffs)
            holo = abs(e.q_coeffs[0]) <= 1e-9 * scale and abs(e.q_coeffs[1]) <= 1e-9 * scale
            assert e.flux_nonzero_predicted == (not holo)

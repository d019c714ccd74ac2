import math
from fractions import Fraction

import numpy as np
import pytest

from edgeworth import models as M


def poly_fd_derivative(f, x0: float, j: int, h: float = 0.05) -> float:
    """j-th derivative at x0 by degree-8 polynomial interpolation on a
    9-point stencil (independent finite-difference oracle)."""
    xs = np.array([x0 + i * h for i in range(-4, 5)])
    ys = np.array([f(x) for x in xs])
    coeffs = np.polyfit(xs - x0, ys, 8)
    p = np.poly1d(coeffs)
    return float(p.deriv(j)(0.0))


class TestClusterLaw:
    def test_intensity(self):
        law = M.ClusterLaw([((0, 0, 1), 1)])
        assert law.intensity == {0: 2, 1: 1}
        assert law.mean_offspring == 3
        assert law.deterministic_offspring

    def test_random_offspring(self):
        law = M.ClusterLaw([((1,), Fraction(1, 2)), ((0, 1, 1), Fraction(1, 2))])
        assert not law.deterministic_offspring
        assert law.intensity == {0: Fraction(1, 2), 1: Fraction(3, 2)}

    def test_probabilities_must_sum(self):
        with pytest.raises(ValueError, match="sum to 1"):
            M.ClusterLaw([((1,), Fraction(1, 2))])

    def test_empty_atom_rejected(self):
        with pytest.raises(ValueError, match="at least one particle"):
            M.ClusterLaw([((), 1)])

    def test_subcritical_model_rejected(self):
        with pytest.raises(ValueError, match="supercritical"):
            M.ModelSpec("dead", M.ClusterLaw([((0,), 1)]))


class TestMValue:
    def test_bst(self):
        b = M.bst()
        assert M.m_value(b, 0.0) == pytest.approx(1.0)
        assert M.phi_value(b, 0.3) == pytest.approx(2 * math.exp(0.3) - 1)

    def test_port(self):
        p = M.port()
        assert M.m_value(p, 0.0) == pytest.approx(2.0)
        assert float(p.m0) == 2.0
        assert p.initial_position == 1 and p.position_shift

    def test_rrt_phi_is_exponential(self):
        r = M.rrt()
        for beta in (-1.0, 0.0, 0.7):
            assert M.phi_value(r, beta) == pytest.approx(math.exp(beta))

    def test_complex_argument(self):
        b = M.bst()
        z = M.m_value(b, 0.1 + 0.5j)
        assert z == pytest.approx(2 * np.exp(0.1 + 0.5j) - 1)


class TestPhiDeriv:
    def test_bst_all_orders_two(self):
        b = M.bst()
        for j in range(1, 7):
            assert M.phi_deriv(b, j, 0.0) == pytest.approx(2.0)

    def test_vertical_bst_parity(self):
        v = M.vertical_bst()
        for j in (1, 3, 5):
            assert M.phi_deriv(v, j, 0.0) == pytest.approx(0.0)
        for j in (2, 4, 6):
            assert M.phi_deriv(v, j, 0.0) == pytest.approx(2.0)

    def test_p_oriented_drift(self):
        for p in (2, 3, 5):
            mod = M.p_oriented(p)
            assert M.phi_deriv(mod, 1, 0.0) == pytest.approx(1.0 / p)

    def test_phi_normalized(self):
        for name in M.BUILTIN_MODELS:
            model = M.get_model(name)
            assert M.phi_value(model, 0.0) == pytest.approx(1.0, abs=1e-15)

    def test_matches_fd_oracle(self):
        b = M.bst()
        for j in range(1, 5):
            fd = poly_fd_derivative(lambda x: M.phi_value(b, x), 0.2, j)
            assert M.phi_deriv(b, j, 0.2) == pytest.approx(fd, rel=1e-7)

    def test_zero_one_support_identity(self):
        # Cluster support in {0,1}: phi(beta) = 1 + phi'(0) (e^beta - 1).
        for name in ("bst", "rrt", "port", "p_oriented:4", "d_ary:3"):
            model = M.get_model(name)
            drift = M.phi_deriv(model, 1, 0.0)
            for beta in (-0.8, 0.0, 0.4, 1.1):
                assert M.phi_value(model, beta) == pytest.approx(
                    1 + drift * (math.exp(beta) - 1), rel=1e-14
                )


class TestBetaRange:
    def test_bst_roots(self):
        lo, hi = M.bst().beta_range()
        assert hi == pytest.approx(0.768, abs=1e-3)
        assert lo == pytest.approx(-1.678, abs=1e-3)
        # Roots of 2 e^beta (1 - beta) = 1.
        for b in (lo, hi):
            assert 2 * math.exp(b) * (1 - b) == pytest.approx(1.0, abs=1e-9)

    def test_port_range(self):
        lo, hi = M.port().beta_range()
        assert math.isinf(lo) and lo < 0
        assert hi == pytest.approx(1.278, abs=1e-3)

    def test_vertical_bst_symmetric(self):
        lo, hi = M.vertical_bst().beta_range()
        assert hi == pytest.approx(0.9071, abs=1e-4)
        assert lo == pytest.approx(-hi, abs=1e-9)

    def test_rrt_upper_is_one(self):
        lo, hi = M.rrt().beta_range()
        assert math.isinf(lo)
        assert hi == pytest.approx(1.0, abs=1e-9)

    def test_g_vanishes_at_finite_endpoints(self):
        for name in ("bst", "vertical_bst", "d_ary:3"):
            model = M.get_model(name)
            lo, hi = model.beta_range()
            for b in (lo, hi):
                if math.isfinite(b):
                    g = M.phi_deriv(model, 1, b) * b - M.phi_value(model, b)
                    assert abs(g) < 1e-10

    def test_phi_convex_inside(self):
        for name in M.BUILTIN_MODELS:
            model = M.get_model(name)
            lo, hi = model.beta_range()
            lo = max(lo, -8.0)
            hi = min(hi, 8.0)
            grid = np.linspace(lo + 1e-6, hi - 1e-6, 1000)
            assert all(M.phi_deriv(model, 2, b) > 0 for b in grid)


class TestSaddleBeta:
    def test_bst_closed_form(self):
        b = M.bst()
        w = math.log(50000.0)
        for k in (12, 20, 30):
            expected = math.log(k / w) - math.log(2.0)
            assert M.saddle_beta(b, k, w) == pytest.approx(expected, abs=1e-10)

    def test_rrt_closed_form(self):
        r = M.rrt()
        w = math.log(10000.0)
        assert M.saddle_beta(r, 15, w) == pytest.approx(math.log(15 / w), abs=1e-10)

    def test_drift_level_gives_zero(self):
        for name in ("bst", "rrt", "port"):
            model = M.get_model(name)
            w = 2000.0  # large w so rounding k barely moves beta
            k = round(M.phi_deriv(model, 1, 0.0) * w)
            assert abs(M.saddle_beta(model, k, w)) < 1e-6

    def test_outside_cone_rejected(self):
        b = M.bst()
        with pytest.raises(ValueError, match="outside admissible cone"):
            M.saddle_beta(b, 10**6, 10.0)


class TestJabbourAndMeans:
    def test_alpha_empty_product(self):
        assert M.jabbour_normalizer(M.bst(), 0, 0.3) == 1.0

    def test_bst_alpha_at_zero_telescopes(self):
        # m(0) = 1: alpha_n(0) = prod (k+2)/(k+1) = n + 1.
        for n in (1, 5, 100):
            assert M.jabbour_normalizer(M.bst(), n, 0.0) == pytest.approx(n + 1, rel=1e-12)

    def test_random_offspring_rejected(self):
        law = [((1,), Fraction(1, 2)), ((1, 1, 1), Fraction(1, 2))]
        model = M.custom(law, name="random")
        with pytest.raises(ValueError, match="Jabbour martingale undefined"):
            M.jabbour_normalizer(model, 5, 0.0)
        with pytest.raises(ValueError, match="Jabbour martingale undefined"):
            M.exact_mean_W(model, 5, 0.0)

    def test_exact_mean_matches_normalizer(self):
        for name in ("bst", "rrt", "port", "d_ary:3"):
            model = M.get_model(name)
            for beta in (-0.5, 0.0, 0.3):
                for n in (10, 1000, 10**5):
                    lhs = M.exact_mean_W(model, n, beta) * n ** M.phi_value(model, beta)
                    rhs = M.jabbour_normalizer(model, n, beta) * math.exp(
                        beta * model.initial_position
                    )
                    assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_bst_mean_w_at_zero(self):
        for n in (1, 10, 12345):
            assert M.exact_mean_W(M.bst(), n, 0.0) == pytest.approx((n + 1) / n, rel=1e-12)

    def test_bst_mean_w_at_minus_log2(self):
        for n in (2, 50, 10**4):
            assert M.exact_mean_W(M.bst(), n, -math.log(2.0)) == pytest.approx(1.0, rel=1e-12)

    def test_limit_mean_values(self):
        assert M.limit_mean_W(M.bst(), 0.0) == pytest.approx(1.0, rel=1e-12)
        assert M.limit_mean_W(M.bst(), -math.log(2.0)) == pytest.approx(1.0, rel=1e-12)
        # Gamma(1/2) / Gamma(3/2) = 2.
        assert M.limit_mean_W(M.port(), 0.0) == pytest.approx(2.0, rel=1e-12)

    def test_exact_mean_approaches_limit(self):
        for name in ("bst", "port"):
            model = M.get_model(name)
            for beta in (-0.5, 0.3):
                limit = M.limit_mean_W(model, beta)
                gap_small = abs(M.exact_mean_W(model, 10**3, beta) - limit)
                gap_large = abs(M.exact_mean_W(model, 10**6, beta) - limit)
                assert gap_large < gap_small


class TestMeanCumulant:
    def test_bst_chi1_at_zero(self):
        # -psi(2) * m'(0) = -2 (1 - gamma_E).
        gamma_e = 0.5772156649015329
        assert M.mean_cumulant(M.bst(), 1, 0.0) == pytest.approx(-2 * (1 - gamma_e), rel=1e-12)

    @pytest.mark.parametrize("name", ["bst", "rrt", "port"])
    def test_matches_fd_oracle(self, name):
        model = M.get_model(name)
        shift = model.initial_position

        def log_mean_w(beta):
            return math.log(M.limit_mean_W(model, beta))

        for beta in (-0.3, 0.0, 0.25):
            for j in range(1, 5):
                fd = poly_fd_derivative(log_mean_w, beta, j, h=0.04)
                assert M.mean_cumulant(model, j, beta) == pytest.approx(fd, abs=1e-6)

    def test_port_shift_enters_first_order_only(self):
        p = M.port()
        base = M.custom([((0, 0, 1), 1)], name="port_at_origin", initial_position=0)
        assert M.mean_cumulant(p, 1, 0.2) == pytest.approx(
            1.0 + M.mean_cumulant(base, 1, 0.2), rel=1e-12
        )
        assert M.mean_cumulant(p, 2, 0.2) == pytest.approx(
            M.mean_cumulant(base, 2, 0.2), rel=1e-12
        )


class TestAssumptions:
    def test_bst_all_pass(self):
        report = M.check_assumptions(M.bst())
        assert report.all_ok
        assert report.results == {"B1": True, "B2": True, "B3": True, "B4": True, "B5": True}

    def test_even_support_fails_lattice(self):
        model = M.custom([((2, 4), 1)], name="even")
        report = M.check_assumptions(model)
        assert report.results["B4"] is False
        assert "rescale" in report.details["B4"]
        assert "2" in report.details["B4"]

    def test_zero_cluster_fails_b1(self):
        law = M.ClusterLaw([((0, 0), 1)])
        report = M.check_assumptions(M.ModelSpec("lazy", law))
        assert report.results["B1"] is False


class TestModelFiles:
    def test_round_trip(self, tmp_path):
        model = M.custom(
            [((1,), Fraction(1, 3)), ((0, 2), Fraction(2, 3))], name="demo", initial_position=1
        )
        path = tmp_path / "demo.json"
        M.save_model_file(model, path)
        loaded = M.load_model_file(path)
        assert loaded.name == "demo"
        assert loaded.initial_position == 1
        assert loaded.cluster.atoms == model.cluster.atoms

    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"name": "x", "atoms": [], "extra": 1}')
        with pytest.raises(ValueError, match="unknown keys"):
            M.load_model_file(path)

    def test_get_model_parses_parameter(self):
        assert M.get_model("d_ary:4").cluster.mean_offspring == 4
        with pytest.raises(KeyError):
            M.get_model("nope")

    def test_binary_case_of_d_ary(self):
        assert M.d_ary(2).cluster.atoms == M.bst().cluster.atoms
        assert M.p_oriented(2).cluster.atoms == M.port().cluster.atoms


class TestDescribe:
    def test_bst_summary(self):
        d = M.describe(M.bst())
        assert d["phi1"] == pytest.approx(2.0)
        assert d["sigma2"] == pytest.approx(2.0)
        assert d["kappa3"] == pytest.approx(2.0)
        assert d["beta_plus"] == pytest.approx(0.768, abs=1e-3)
        assert d["assumptions"]["B4"] is True

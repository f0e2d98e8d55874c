import io
import math

import numpy as np
import pandas as pd
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from accountant.bounds import gdp_to_eps_delta
from accountant.domain import GdpParam, ShuffleParams
from accountant.exceptions import DomainError
from accountant.pairdist import build_pair
from accountant.tradeoff import (
    TradeoffCurve,
    curve_eval,
    curve_inverse,
    curve_symmetrize,
    curve_to_csv,
    gaussian_curve,
    h_closed_form,
    np_curve,
)

from .oracles import FULL_ENUMERATION_TOL, enumerate_pair, np_breakpoints

GRID = np.linspace(0.0, 1.0, 401)


def identity_curve():
    return TradeoffCurve(np.array([0.0, 1.0]), np.array([1.0, 0.0]))


class NpCurveTests(SimpleTestCase):

    def test_identical_distributions(self):
        curve = np_curve(*build_pair(ShuffleParams(0.0, 20)))
        self.assertEqual(curve.breakpoints, [(0.0, 1.0), (1.0, 0.0)])

    def test_randomized_response_shape(self):
        curve = np_curve(*build_pair(ShuffleParams(math.log(2.0), 1)))
        assert_allclose(curve.alphas, [0.0, 1.0 / 3.0, 1.0], atol=1e-15)
        assert_allclose(curve.betas, [1.0, 1.0 / 3.0, 0.0], atol=1e-15)
        assert_allclose(curve.slopes(), [-2.0, -0.5], atol=1e-12)

    def test_matches_brute_force(self):
        for eps0 in (0.5, 1.0, 2.0):
            expected_a, expected_b = np_breakpoints(*enumerate_pair(eps0, 10), eps0)
            curve = np_curve(*build_pair(ShuffleParams(eps0, 10), FULL_ENUMERATION_TOL))
            self.assertEqual(curve.alphas.size, len(expected_a))
            assert_allclose(curve.alphas, expected_a, atol=1e-12)
            assert_allclose(curve.betas, expected_b, atol=1e-12)

    def test_slopes_are_likelihood_ratios(self):
        params = ShuffleParams(1.0, 10)
        P, Q = build_pair(params, FULL_ENUMERATION_TOL)
        curve = np_curve(P, Q)
        ratios = np.unique(np.round(np.exp(Q.log_p - P.log_p), 12))[::-1]
        assert_allclose(np.exp(curve.log_drops - curve.log_widths), ratios, rtol=1e-10)

    def test_convex_and_anchored(self):
        for eps0, n in ((0.25, 10), (1.0, 1000), (2.0, 2000)):
            curve = np_curve(*build_pair(ShuffleParams(eps0, n)))
            self.assertTrue(curve.is_convex())
            self.assertEqual(curve.betas[0], 1.0)
            self.assertEqual(curve.alphas[-1], 1.0)

    def test_dominates_local_region(self):
        for eps0, n in ((0.5, 10), (1.0, 100), (2.0, 1000)):
            curve = np_curve(*build_pair(ShuffleParams(eps0, n)))
            floor = np.maximum.reduce([
                np.zeros_like(GRID),
                1.0 - math.exp(eps0) * GRID,
                math.exp(-eps0) * (1.0 - GRID),
            ])
            self.assertTrue(np.all(curve(GRID) >= floor - 1e-12))

    def test_self_duality(self):
        P, Q = build_pair(ShuffleParams(1.0, 300))
        assert_allclose(np_curve(P, Q)(GRID), np_curve(Q, P)(GRID), atol=1e-12)

    def test_improves_with_more_users(self):
        alphas = np.arange(0.05, 0.501, 0.05)
        for eps0 in (0.5, 1.0, 2.0):
            small = np_curve(*build_pair(ShuffleParams(eps0, 1000)))(alphas)
            large = np_curve(*build_pair(ShuffleParams(eps0, 4000)))(alphas)
            self.assertTrue(np.all(large >= small - 1e-9))


class ClosedFormTests(SimpleTestCase):

    def test_uninformative_limit(self):
        alphas = np.linspace(0.0, 1.0, 11)
        for alpha, beta in h_closed_form(ShuffleParams(0.0, 50), alphas):
            self.assertAlmostEqual(beta, 1.0 - alpha, delta=1e-15)

    def test_single_user(self):
        (alpha, beta), = h_closed_form(ShuffleParams(math.log(2.0), 1), [1.0 / 3.0])
        self.assertAlmostEqual(beta, 1.0 / 3.0, delta=1e-12)

    def test_never_below_exact_curve(self):
        params = ShuffleParams(1.0, 10)
        curve = np_curve(*build_pair(params))
        for alpha, beta in h_closed_form(params, np.linspace(0.0, 1.0, 50)):
            self.assertGreaterEqual(beta, curve_eval(curve, alpha) - 1e-12)

    def test_agrees_at_achievable_alphas(self):
        params = ShuffleParams(1.0, 10)
        curve = np_curve(*build_pair(params))
        inner = curve.alphas[1:-1]
        for (alpha, beta), exact in zip(h_closed_form(params, inner), curve.betas[1:-1]):
            self.assertAlmostEqual(beta, exact, delta=1e-12)

    def test_grid_out_of_range(self):
        with self.assertRaises(DomainError):
            h_closed_form(ShuffleParams(1.0, 10), [0.5, 1.5])


class GaussianCurveTests(SimpleTestCase):

    def test_spot_values(self):
        self.assertAlmostEqual(gaussian_curve(1.0)(0.5), 0.158655, delta=1e-6)
        self.assertEqual(gaussian_curve(2.0)(0.0), 1.0)
        assert_allclose(gaussian_curve(0.0)(GRID), 1.0 - GRID, atol=1e-15)

    def test_negative_mu(self):
        with self.assertRaises(DomainError):
            gaussian_curve(-0.1)

    def test_piecewise_sup_error(self):
        for mu in (0.05, 0.5, 1.0, 3.0):
            curve = gaussian_curve(mu)
            piecewise = curve.to_piecewise()
            dense = np.linspace(0.0, 1.0, 20_001)
            self.assertLessEqual(np.max(np.abs(piecewise(dense) - curve(dense))), 1e-6)

    def test_eps_delta_duality(self):
        mu = 1.0
        curve = gaussian_curve(mu)
        alphas = np.linspace(0.0, 1.0, 1001)
        betas = curve(alphas)
        for eps in (0.0, 0.5, 1.0, 2.0):
            delta = gdp_to_eps_delta(GdpParam(mu), eps).delta
            # the tightest delta with f >= 1 - delta - e^eps alpha
            tightest = np.max(1.0 - betas - math.exp(eps) * alphas)
            self.assertAlmostEqual(tightest, delta, delta=1e-3)
            self.assertLessEqual(tightest, delta + 1e-12)


class CurveAlgebraTests(SimpleTestCase):

    def test_symmetrize_keeps_symmetric_curves(self):
        curve = np_curve(*build_pair(ShuffleParams(1.0, 200)))
        assert_allclose(curve_symmetrize(curve)(GRID), curve(GRID), atol=1e-12)

    def test_symmetrize_identity(self):
        assert_allclose(curve_symmetrize(identity_curve())(GRID), 1.0 - GRID, atol=1e-15)

    def test_symmetrize_asymmetric_curve(self):
        curve = TradeoffCurve(np.array([0.0, 0.1, 1.0]), np.array([1.0, 0.5, 0.0]))
        symmetric = curve_symmetrize(curve)
        self.assertTrue(symmetric.is_convex())
        assert_allclose(symmetric(GRID), curve_inverse(symmetric)(GRID), atol=1e-12)
        self.assertTrue(np.all(symmetric(GRID) <= curve(GRID) + 1e-12))

    def test_eval_at_breakpoints(self):
        curve = np_curve(*build_pair(ShuffleParams(math.log(2.0), 1)))
        self.assertEqual(curve_eval(curve, curve.alphas[1]), curve.betas[1])

    def test_eval_out_of_range(self):
        for alpha in (-0.01, 1.01, float('nan')):
            with self.assertRaises(DomainError):
                curve_eval(identity_curve(), alpha)

    def test_invalid_curves(self):
        with self.assertRaises(DomainError):
            TradeoffCurve(np.array([0.0, 0.5, 1.0]), np.array([1.0, 0.8, 0.0]))
        with self.assertRaises(DomainError):
            TradeoffCurve(np.array([0.0, 0.5]), np.array([1.0, 0.0]))

    def test_csv_export(self):
        buffer = io.StringIO()
        curve_to_csv(np_curve(*build_pair(ShuffleParams(math.log(2.0), 1))), buffer)
        frame = pd.read_csv(io.StringIO(buffer.getvalue()))
        self.assertEqual(list(frame.columns), ['alpha', 'beta'])
        self.assertEqual(len(frame), 3)

    def test_csv_text_for_points_and_gaussian_grid(self):
        text = curve_to_csv([(0.0, 1.0), (1.0, 0.0)])
        self.assertEqual(text.splitlines(), ['alpha,beta', '0.0,1.0', '1.0,0.0'])
        frame = pd.read_csv(io.StringIO(curve_to_csv(gaussian_curve(1.0), grid=[0.0, 0.5, 1.0])))
        self.assertAlmostEqual(frame['beta'][1], 0.158655, delta=1e-6)

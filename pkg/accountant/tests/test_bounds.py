import math

import numpy as np
from django.test import SimpleTestCase

from accountant.bounds import (
    APPROXIMATE_REFERENCE,
    corollary2_rdp,
    eps_from_mu,
    feldman_ref,
    gdp_compose,
    gdp_to_eps_delta,
    gdp_to_rdp,
    girgis_lower,
    girgis_upper,
    rdp_best_eps,
    rdp_compose,
    rdp_to_eps_delta,
    theorem2_gdp,
    theorem3_gdp,
    theorem3_rdp,
)
from accountant.domain import GdpParam, RdpPoint, ShuffleParams
from accountant.exceptions import DomainError


def phi(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


class ShuffleBoundTests(SimpleTestCase):

    def test_gdp_bound(self):
        mu = theorem2_gdp(ShuffleParams(2.0, 10_000)).mu
        self.assertAlmostEqual(mu, 2.0 * math.e / math.sqrt(9999), delta=1e-15)
        self.assertAlmostEqual(mu, 0.054368, delta=1e-6)

    def test_gdp_bound_needs_two_users(self):
        with self.assertRaises(DomainError):
            theorem2_gdp(ShuffleParams(1.0, 1))

    def test_rdp_bound(self):
        value = corollary2_rdp(ShuffleParams(2.0, 10_000), 4.0).epsilon
        self.assertAlmostEqual(value / (8.0 * math.e ** 2 / 9999), 1.0, delta=1e-12)
        self.assertAlmostEqual(corollary2_rdp(ShuffleParams(1.0, 101), 2.0).epsilon,
                               4.0 * math.e / 100.0, delta=1e-12)

    def test_rdp_bound_order_range(self):
        with self.assertRaises(DomainError):
            corollary2_rdp(ShuffleParams(1.0, 100), 1.5)

    def test_sgd_bound(self):
        point = theorem3_rdp(1.0, 50, 100, 2.0)
        self.assertAlmostEqual(point.epsilon, 200.0 * math.e / 99.0, delta=1e-12)
        self.assertAlmostEqual(point.epsilon, 5.4915, delta=1e-4)
        self.assertAlmostEqual(theorem3_gdp(1.0, 50, 100).mu,
                               2.0 * math.sqrt(50) * math.exp(0.5) / math.sqrt(99), delta=1e-12)

    def test_sgd_bound_without_noise(self):
        self.assertEqual(theorem3_rdp(math.inf, 3, 10, 2.0).epsilon, math.inf)
        self.assertEqual(theorem3_gdp(math.inf, 3, 10).mu, math.inf)


class GdpToolboxTests(SimpleTestCase):

    def test_gdp_to_rdp(self):
        self.assertAlmostEqual(gdp_to_rdp(GdpParam(0.3), 5.0).epsilon, 0.5 * 0.09 * 5.0, delta=1e-15)

    def test_delta_spot_values(self):
        self.assertAlmostEqual(gdp_to_eps_delta(GdpParam(1.0), 0.0).delta, 2.0 * phi(0.5) - 1.0, delta=1e-9)
        self.assertAlmostEqual(gdp_to_eps_delta(GdpParam(1.0), 0.0).delta, 0.382925, delta=1e-6)
        expected = phi(0.5) - math.e * phi(-1.5)
        self.assertAlmostEqual(gdp_to_eps_delta(GdpParam(2.0), 1.0).delta, expected, delta=1e-12)

    def test_delta_decreases_in_epsilon(self):
        deltas = [gdp_to_eps_delta(GdpParam(0.8), eps).delta for eps in np.linspace(0.0, 6.0, 61)]
        self.assertTrue(all(b <= a for a, b in zip(deltas, deltas[1:])))

    def test_eps_from_mu_inverts_delta(self):
        for mu, delta in ((0.5, 1e-5), (1.0, 1e-3), (3.0, 1e-8)):
            eps = eps_from_mu(GdpParam(mu), delta)
            self.assertAlmostEqual(gdp_to_eps_delta(GdpParam(mu), eps).delta / delta, 1.0, delta=1e-6)

    def test_eps_from_mu_already_met(self):
        self.assertEqual(eps_from_mu(GdpParam(0.01), 0.5), 0.0)
        self.assertEqual(eps_from_mu(GdpParam(0.0), 1e-5), 0.0)

    def test_compose(self):
        self.assertAlmostEqual(gdp_compose([0.02] * 50).mu, math.sqrt(50) * 0.02, delta=1e-15)
        self.assertAlmostEqual(gdp_compose([0.02] * 50).mu, 0.141421, delta=1e-6)
        self.assertAlmostEqual(gdp_compose([0.3, 0.4]).mu, 0.5, delta=1e-15)

    def test_negative_epsilon(self):
        with self.assertRaises(DomainError):
            gdp_to_eps_delta(GdpParam(1.0), -0.1)


class PriorBoundTests(SimpleTestCase):

    def test_upper_spot_value(self):
        point = girgis_upper(ShuffleParams(1.0, 10_000), 2)
        n_bar = 1840
        expected = math.log(math.exp(4.0 * (math.e - 1.0) ** 2 / n_bar) + math.exp(2.0 - 9999 / (8.0 * math.e)))
        self.assertAlmostEqual(point.epsilon, expected, delta=1e-12)
        self.assertAlmostEqual(point.epsilon, 0.0064185, delta=1e-6)
        self.assertIn('integer_order_only', point.flags)

    def test_upper_needs_integer_order(self):
        with self.assertRaises(DomainError) as ctx:
            girgis_upper(ShuffleParams(1.0, 10_000), 2.5)
        self.assertEqual(ctx.exception.code, 'not_integer')

    def test_lower_spot_value(self):
        point = girgis_lower(ShuffleParams(math.log(2.0), 100), 2.0)
        self.assertAlmostEqual(point.epsilon / math.log(1.005), 1.0, delta=1e-12)

    def test_reference_is_flagged(self):
        params = ShuffleParams(2.0, 10_000)
        point = feldman_ref(params, 4.0)
        self.assertAlmostEqual(point.epsilon, 64.0 * math.e ** 2 * 4.0 / 10_000, delta=1e-12)
        self.assertIn(APPROXIMATE_REFERENCE, point.flags)
        ratio = point.epsilon / corollary2_rdp(params, 4.0).epsilon
        self.assertAlmostEqual(ratio, 32.0 * 9999 / 10_000, delta=1e-9)

    def test_lower_below_upper(self):
        for eps0 in np.linspace(0.1, 3.0, 15):
            params = ShuffleParams(float(eps0), 10_000)
            self.assertLessEqual(girgis_lower(params, 4.0).epsilon, girgis_upper(params, 4).epsilon)


class RdpToolboxTests(SimpleTestCase):

    def test_conversion(self):
        converted = rdp_to_eps_delta(RdpPoint(lam=3.0, epsilon=0.2), 1e-5)
        self.assertAlmostEqual(converted.epsilon, 0.2 + math.log(1e5) / 2.0, delta=1e-12)
        self.assertEqual(converted.delta, 1e-5)

    def test_best_order(self):
        points = [gdp_to_rdp(GdpParam(0.5), lam) for lam in (2.0, 8.0, 32.0, 128.0)]
        best = rdp_best_eps(points, 1e-6)
        self.assertEqual(best.epsilon, min(rdp_to_eps_delta(p, 1e-6).epsilon for p in points))

    def test_compose_adds(self):
        composed = rdp_compose([
            RdpPoint(lam=4.0, epsilon=0.1, error_bound=1e-10),
            RdpPoint(lam=4.0, epsilon=0.25, flags=(APPROXIMATE_REFERENCE,)),
        ])
        self.assertAlmostEqual(composed.epsilon, 0.35, delta=1e-15)
        self.assertEqual(composed.error_bound, 1e-10)
        self.assertEqual(composed.flags, (APPROXIMATE_REFERENCE,))

    def test_compose_mixed_orders(self):
        with self.assertRaises(DomainError) as ctx:
            rdp_compose([RdpPoint(lam=2.0, epsilon=0.1), RdpPoint(lam=3.0, epsilon=0.1)])
        self.assertEqual(ctx.exception.code, 'mixed_orders')

    def test_delta_range(self):
        with self.assertRaises(DomainError):
            rdp_to_eps_delta(RdpPoint(lam=2.0, epsilon=0.1), 1.0)

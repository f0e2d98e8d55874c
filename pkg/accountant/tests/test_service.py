import io
import math

import pandas as pd
from django.core.cache import cache
from django.test import SimpleTestCase

from accountant.bounds import APPROXIMATE_REFERENCE
from accountant.domain import ShuffleParams
from accountant.exceptions import DomainError
from accountant.forms import CompareForm, RdpForm, SimulateForm
from accountant.services.accounting_service import (
    CSV_COLUMNS,
    METHODS,
    AccountingService,
    OutputRecord,
    preset_grid,
    records_to_csv,
)


class AccountingServiceTests(SimpleTestCase):

    def setUp(self):
        cache.clear()
        self.service = AccountingService(workers=2)

    def test_exact_point_is_cached(self):
        params = ShuffleParams(math.log(2.0), 1)
        first = self.service.exact_point(params, 2.0)
        self.assertAlmostEqual(first.epsilon, math.log(1.5), delta=1e-12)
        self.assertIsNotNone(cache.get(self.service._cache_key(params, [2.0])))
        self.assertEqual(self.service.exact_point(params, 2.0), first)

    def test_compare_grid_rows_are_sorted(self):
        records = self.service.compare_grid([1.0, 0.5], [100], [4.0, 2.0], METHODS)
        keys = [record.sort_key() for record in records]
        self.assertEqual(keys, sorted(keys))
        self.assertEqual(len(records), 2 * 2 * len(METHODS))

    def test_compare_grid_skips_inapplicable_methods(self):
        records = self.service.compare_grid([1.0], [100], [2.5], ['girgis_upper', 'girgis_lower'])
        self.assertEqual([record.method for record in records], ['girgis_lower'])

    def test_single_user_skips_asymptotic_bounds(self):
        records = self.service.compare_grid([1.0], [1], [2.0], ['exact', 'corollary2', 'theorem2_gdp'])
        self.assertEqual([record.method for record in records], ['exact'])

    def test_reference_rows_keep_their_flag(self):
        record, = self.service.compare_grid([2.0], [10_000], [4.0], ['feldman_ref'])
        self.assertEqual(record.flags, (APPROXIMATE_REFERENCE,))
        self.assertEqual(record.as_row()['flags'], APPROXIMATE_REFERENCE)

    def test_unknown_method(self):
        with self.assertRaises(DomainError):
            self.service.compare_grid([1.0], [100], [2.0], ['moments'])

    def test_csv_layout(self):
        records = self.service.compare_grid([1.0], [100], [2.0], ['exact', 'girgis_lower'])
        frame = pd.read_csv(io.StringIO(records_to_csv(records)))
        self.assertEqual(list(frame.columns), CSV_COLUMNS)
        self.assertEqual(frame['method'].tolist(), ['exact', 'girgis_lower'])

    def test_record_dict(self):
        record = OutputRecord(1.0, 10, 2.0, 'corollary2', 0.5)
        self.assertEqual(record.as_dict(), {
            'epsilon0': 1.0, 'n': 10, 'lambda': 2.0, 'method': 'corollary2',
            'epsilon': 0.5, 'error_bound': 0.0, 'flags': [],
        })
        with self.assertRaises(DomainError):
            OutputRecord(1.0, 10, 2.0, 'unknown', 0.5)


class PresetTests(SimpleTestCase):

    def test_sweep_over_epsilon0(self):
        grid = preset_grid('fig2')
        self.assertEqual(len(grid['epsilon0s']), 15)
        self.assertAlmostEqual(grid['epsilon0s'][0], 0.1, delta=1e-15)
        self.assertAlmostEqual(grid['epsilon0s'][-1], 3.0, delta=1e-15)
        self.assertEqual((grid['ns'], grid['lambdas']), ([10_000], [4.0]))

    def test_sweep_over_orders(self):
        grid = preset_grid('fig3')
        self.assertEqual(grid['lambdas'], [float(lam) for lam in range(2, 17)])
        self.assertEqual((grid['epsilon0s'], grid['ns']), ([2.0], [10_000]))

    def test_unknown_preset(self):
        with self.assertRaises(DomainError):
            preset_grid('fig9')


class FormTests(SimpleTestCase):

    def test_rdp_form_rejects_order_one(self):
        form = RdpForm(data={'epsilon0': 1.0, 'n': 10, 'lam': 1.0, 'format': 'json'})
        self.assertFalse(form.is_valid())
        self.assertIn('lam', form.errors)

    def test_rdp_form_tail_tol_range(self):
        form = RdpForm(data={'epsilon0': 1.0, 'n': 10, 'lam': 2.0, 'format': 'json', 'tail_tol': 1e-3})
        self.assertFalse(form.is_valid())
        self.assertIn('tail_tol', form.errors)

    def test_compare_form_fills_from_preset(self):
        form = CompareForm(data={'preset': 'fig3', 'methods': ['exact']})
        self.assertTrue(form.is_valid(), form.errors)
        self.assertEqual(form.cleaned_data['lam'], [float(lam) for lam in range(2, 17)])

    def test_compare_form_needs_a_grid(self):
        form = CompareForm(data={'preset': '', 'methods': ['exact'], 'n': [100]})
        self.assertFalse(form.is_valid())
        self.assertIn('epsilon0', form.errors)

    def test_simulate_form_needs_an_action(self):
        form = SimulateForm(data={'epsilon0': 1.0, 'n': 10, 'samples': 100_000, 'seed': 0})
        self.assertFalse(form.is_valid())

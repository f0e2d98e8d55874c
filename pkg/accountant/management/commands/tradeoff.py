import numpy as np

from accountant.bounds import theorem2_gdp
from accountant.domain import ShuffleParams
from accountant.forms import TradeoffForm
from accountant.management.base import AccountingCommand
from accountant.pairdist import build_pair
from accountant.tradeoff import curve_symmetrize, curve_to_csv, gaussian_curve, h_closed_form, np_curve


class Command(AccountingCommand):
    help = 'Export a trade-off curve (alpha, beta) as CSV'
    form_class = TradeoffForm

    def add_arguments(self, parser):
        parser.add_argument('--epsilon0', type=float, required=True, help='Local privacy level (nats)')
        parser.add_argument('--n', type=int, required=True, help='Number of users')
        parser.add_argument('--kind', choices=[kind for kind, _ in TradeoffForm.KIND_CHOICES], default='exact',
                            help='exact (Neyman-Pearson), closed-form (threshold test on a grid), '
                                 'gaussian, or symmetrized')
        parser.add_argument('--grid-points', type=int, default=101,
                            help='Grid size for closed-form and gaussian curves')
        parser.add_argument('--mu', type=float, help='Gaussian parameter (default: the shuffle-model GDP bound)')
        parser.add_argument('--tail-tol', type=float, help='Truncated probability budget')
        parser.add_argument('--output', metavar='PATH', help='CSV file to write (default: stdout)')
        parser.add_argument('--dump-pmf', metavar='PATH', help='Write the P side of the pair as CSV (a, b, log_p)')

    def run(self, **options):
        args = self.validate({
            'epsilon0': options['epsilon0'],
            'n': options['n'],
            'kind': options['kind'],
            'grid_points': options['grid_points'],
            'mu': options.get('mu'),
            'tail_tol': options.get('tail_tol'),
        })
        params = ShuffleParams(args['epsilon0'], args['n'])
        kind = args['kind']
        grid = np.linspace(0.0, 1.0, args['grid_points'])

        pair = None
        if kind in ('exact', 'symmetrized') or options.get('dump_pmf'):
            pair = build_pair(params, args['tail_tol'])

        if kind == 'exact':
            curve, curve_grid = np_curve(*pair), None
        elif kind == 'symmetrized':
            curve, curve_grid = curve_symmetrize(np_curve(*pair)), None
        elif kind == 'closed-form':
            curve, curve_grid = h_closed_form(params, grid, args['tail_tol']), None
        else:
            mu = args['mu'] if args['mu'] is not None else theorem2_gdp(params).mu
            curve, curve_grid = gaussian_curve(mu), grid

        if options.get('dump_pmf'):
            pair[0].to_csv(options['dump_pmf'])

        output = options.get('output')
        if output:
            with open(output, 'w', newline='') as handle:
                curve_to_csv(curve, handle, curve_grid)
        else:
            self.stdout.write(curve_to_csv(curve, grid=curve_grid), ending='')

import pandas as pd

from accountant.domain import ShuffleParams
from accountant.forms import SimulateForm
from accountant.management.base import AccountingCommand
from accountant.mc import clt_diagnostic, estimate_curve, estimate_renyi_plugin
from accountant.pairdist import build_pair
from accountant.renyi import renyi_direct
from accountant.tradeoff import curve_eval, np_curve


class Command(AccountingCommand):
    help = 'Monte Carlo checks of the shuffled pair: empirical trade-off points, plug-in Renyi, CLT diagnostic'
    form_class = SimulateForm

    def add_arguments(self, parser):
        parser.add_argument('--epsilon0', type=float, required=True, help='Local privacy level (nats)')
        parser.add_argument('--n', type=int, required=True, help='Number of users')
        parser.add_argument('--alpha', type=float, nargs='+', help='Type-I errors at which to estimate beta')
        parser.add_argument('--samples', type=int, default=100_000, help='Samples per side')
        parser.add_argument('--seed', type=int, default=0, help='Seed of the random streams')
        parser.add_argument('--lambda', dest='lam', type=float, help='Order of a plug-in Renyi estimate')
        parser.add_argument('--clt-n', type=int, nargs='+', help='User counts for the CLT diagnostic')
        parser.add_argument('--output', metavar='PATH', help='CSV of empirical curve points (alpha, beta_hat, stderr)')

    def run(self, **options):
        args = self.validate({
            'epsilon0': options['epsilon0'],
            'n': options['n'],
            'alpha': options.get('alpha'),
            'samples': options['samples'],
            'seed': options['seed'],
            'lam': options.get('lam'),
            'clt_n': options.get('clt_n'),
        })
        params = ShuffleParams(args['epsilon0'], args['n'])
        samples, seed = args['samples'], args['seed']
        result = {'epsilon0': params.epsilon0, 'n': params.n, 'samples': samples, 'seed': seed}

        pair = build_pair(params) if args['alpha'] or args['lam'] is not None else None
        if args['alpha']:
            curve = np_curve(*pair)
            points = estimate_curve(params, args['alpha'], samples, seed)
            result['beta'] = [
                {'alpha': alpha, 'beta_hat': est.value, 'stderr': est.stderr, 'exact': curve_eval(curve, alpha)}
                for alpha, est in points
            ]
            if options.get('output'):
                frame = pd.DataFrame(
                    [(alpha, est.value, est.stderr) for alpha, est in points],
                    columns=['alpha', 'beta_hat', 'stderr'],
                )
                with open(options['output'], 'w', newline='') as handle:
                    frame.to_csv(handle, index=False)

        if args['lam'] is not None:
            estimate = estimate_renyi_plugin(params, args['lam'], samples, seed)
            result['renyi'] = dict(estimate.as_dict(), **{
                'lambda': args['lam'],
                'exact': renyi_direct(*pair, args['lam']).epsilon,
            })

        if args['clt_n']:
            result['clt'] = clt_diagnostic(params, samples, seed, args['clt_n'])

        self.emit_json(result)

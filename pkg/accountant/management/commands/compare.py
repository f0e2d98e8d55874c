from accountant.forms import CompareForm
from accountant.management.base import AccountingCommand
from accountant.services.accounting_service import METHODS, AccountingService, records_to_csv


class Command(AccountingCommand):
    help = 'Compare the exact shuffle RDP with closed-form bounds over a parameter grid (CSV)'
    form_class = CompareForm

    def add_arguments(self, parser):
        parser.add_argument('--preset', choices=['fig2', 'fig3'],
                            help='fig2: lambda=4, n=1e4, epsilon0 in [0.1, 3]; fig3: epsilon0=2, n=1e4, lambda=2..16')
        parser.add_argument('--epsilon0', type=float, nargs='+', help='Local privacy levels')
        parser.add_argument('--n', type=int, nargs='+', help='Numbers of users')
        parser.add_argument('--lambda', dest='lam', type=float, nargs='+', help='Renyi orders')
        parser.add_argument('--methods', nargs='*', default=list(METHODS),
                            help=f"Subset of: {', '.join(METHODS)}")
        parser.add_argument('--output', metavar='PATH', help='CSV file to write (default: stdout)')
        parser.add_argument('--tail-tol', type=float, help='Truncated probability budget for exact rows')
        parser.add_argument('--workers', type=int, help='Worker threads for the grid sweep')

    def run(self, **options):
        args = self.validate({
            'preset': options.get('preset') or '',
            'epsilon0': options.get('epsilon0'),
            'n': options.get('n'),
            'lam': options.get('lam'),
            'methods': options.get('methods'),
            'tail_tol': options.get('tail_tol'),
            'workers': options.get('workers'),
        })
        service = AccountingService(tail_tol=args['tail_tol'], workers=args['workers'])
        records = service.compare_grid(args['epsilon0'], args['n'], args['lam'], args['methods'])

        output = options.get('output')
        if output:
            with open(output, 'w', newline='') as handle:
                records_to_csv(records, handle)
            self.stderr.write(self.style.SUCCESS(f"Wrote {len(records)} rows to {output}"))
        else:
            self.stdout.write(records_to_csv(records), ending='')

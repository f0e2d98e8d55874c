from accountant.domain import ShuffleParams
from accountant.forms import RdpForm
from accountant.management.base import AccountingCommand
from accountant.pairdist import build_pair
from accountant.services.accounting_service import AccountingService, OutputRecord, records_to_csv


class Command(AccountingCommand):
    help = 'Exact Renyi-DP guarantee of a shuffled epsilon0-LDP process over n users'
    form_class = RdpForm

    def add_arguments(self, parser):
        parser.add_argument('--epsilon0', type=float, required=True, help='Local privacy level (nats)')
        parser.add_argument('--n', type=int, required=True, help='Number of users')
        parser.add_argument('--lambda', dest='lam', type=float, required=True, help='Renyi order (> 1)')
        parser.add_argument('--tail-tol', type=float, help='Truncated probability budget (default from settings)')
        parser.add_argument('--format', choices=['json', 'csv'], default='json', help='Output format')
        parser.add_argument('--dump-pmf', metavar='PATH', help='Write the P side of the pair as CSV (a, b, log_p)')

    def run(self, **options):
        args = self.validate({
            'epsilon0': options['epsilon0'],
            'n': options['n'],
            'lam': options['lam'],
            'tail_tol': options.get('tail_tol'),
            'format': options['format'],
        })
        params = ShuffleParams(args['epsilon0'], args['n'])
        service = AccountingService(tail_tol=args['tail_tol'])
        record = OutputRecord.from_point(params, 'exact', service.exact_point(params, args['lam']))

        if options.get('dump_pmf'):
            P, _ = build_pair(params, service.tail_tol)
            P.to_csv(options['dump_pmf'])

        if args['format'] == 'csv':
            self.stdout.write(records_to_csv([record]), ending='')
        else:
            self.emit_json(record.as_dict())

from django.core.management.base import CommandError

from accountant.domain import GdpParam, RdpPoint
from accountant.management.base import EXIT_INFEASIBLE, AccountingCommand
from training.forms import PlanForm
from training.sgd import plan_epsilon0


class Command(AccountingCommand):
    help = 'Find the local epsilon0 that meets a central RDP or GDP budget for shuffled SGD'
    form_class = PlanForm

    def add_arguments(self, parser):
        target = parser.add_mutually_exclusive_group(required=True)
        target.add_argument('--rdp-slope', type=float, help='Target epsilon(lambda) = slope * lambda')
        target.add_argument('--target-rdp', type=float, help='Target epsilon at the order given by --lambda')
        target.add_argument('--target-mu', type=float, help='Target GDP parameter mu')
        parser.add_argument('--lambda', dest='lam', type=float, help='Renyi order (default 2)')
        parser.add_argument('--epochs', type=int, required=True, help='Passes over the data (T)')
        parser.add_argument('--blocks', type=int, required=True, help='Number of blocks (m)')

    def run(self, **options):
        args = self.validate({name: options.get(name) for name in PlanForm.base_fields})
        lam = args['lam'] if args['lam'] is not None else 2.0
        if args['rdp_slope'] is not None:
            target = RdpPoint(lam=lam, epsilon=args['rdp_slope'] * lam)
        elif args['target_rdp'] is not None:
            target = RdpPoint(lam=lam, epsilon=args['target_rdp'])
        else:
            target = GdpParam(mu=args['target_mu'])

        plan = plan_epsilon0(target, args['epochs'], args['blocks'])
        self.emit_json(plan.as_dict())
        if not plan.feasible:
            raise CommandError(f"infeasible plan: {plan.minimal_achievable}", returncode=EXIT_INFEASIBLE)

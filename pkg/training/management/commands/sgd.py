from accountant.management.base import AccountingCommand
from training.conf import get_config
from training.datasets import synthetic_blobs
from training.forms import SgdForm
from training.losses import get_loss
from training.sgd import SgdConfig, run_shuffled_sgd


class Command(AccountingCommand):
    help = 'Train on synthetic blobs with shuffled noisy SGD and report its privacy'
    form_class = SgdForm

    def add_arguments(self, parser):
        defaults = get_config()
        parser.add_argument('--eta', type=float, default=defaults['ETA'], help='Step size')
        parser.add_argument('--epochs', type=int, default=defaults['EPOCHS'], help='Passes over the data (T)')
        parser.add_argument('--blocks', type=int, default=defaults['BLOCKS'], help='Number of blocks (m)')
        parser.add_argument('--clip', type=float, default=defaults['CLIP'], help='l1 clipping bound')
        parser.add_argument('--epsilon0', type=float, required=True, help='Local privacy level; inf disables noise')
        parser.add_argument('--lambda', dest='lam', type=float, default=2.0, help='Renyi order of the report')
        parser.add_argument('--samples', type=int, default=defaults['SAMPLES'], help='Synthetic dataset size')
        parser.add_argument('--features', type=int, default=defaults['FEATURES'], help='Synthetic feature count')
        parser.add_argument('--classes', type=int, default=2, help='Number of blobs')
        parser.add_argument('--loss', choices=['logistic', 'softmax', 'squared'], default='logistic')
        parser.add_argument('--seed', type=int, default=0, help='Seed for data, noise and permutations')
        parser.add_argument('--permutation-seed', type=int, help='Separate seed for the block permutations')
        parser.add_argument('--loss-csv', metavar='PATH', help='Write the loss trace as CSV (epoch, loss)')

    def run(self, **options):
        args = self.validate({name: options.get(name) for name in SgdForm.base_fields})
        data = synthetic_blobs(args['samples'], args['features'], args['classes'], seed=args['seed'])
        loss = get_loss(args['loss'], args['classes'])
        cfg = SgdConfig(
            eta=args['eta'],
            epochs=args['epochs'],
            blocks=args['blocks'],
            clip=args['clip'],
            epsilon0=args['epsilon0'],
            dim=loss.dim(data.features.shape[1]),
            seed=args['seed'],
            permutation_seed=args['permutation_seed'],
        )
        report = run_shuffled_sgd(data, loss, cfg, args['lam'])
        if options.get('loss_csv'):
            with open(options['loss_csv'], 'w', newline='') as handle:
                report.loss_frame().to_csv(handle, index=False)
        self.emit_json(report.as_dict())

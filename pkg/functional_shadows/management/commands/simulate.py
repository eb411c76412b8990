import logging
import os

from django.conf import settings

from functional_shadows.manifest import RunManifest, write_manifest
from functional_shadows.serializers import SimConfigSerializer, load_validated
from functional_shadows.simulator import simulate
from functional_shadows.tables import write_count_csv
from functional_shadows.utils import dump_json

from ._base import ShadowfitCommand

logger = logging.getLogger(__name__)

COUNTS_CSV = 'counts.csv'
SIDECAR_JSON = 'counts.json'


class Command(ShadowfitCommand):
    help = 'Simulate a photon-count table from a JSON run config'

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help='Path to the JSON run config')
        parser.add_argument('--seed', type=int, help='Override the seed given in the config')
        parser.add_argument('--out', default='.', help='Output directory')

    def handle(self, *args, **options):
        data = self.read_json_file(options['config'], 'config')
        if isinstance(data, dict) and options.get('seed') is not None:
            data['seed'] = options['seed']
        config = load_validated(SimConfigSerializer, data)

        self.stdout.write(
            f'Simulating {len(config.xs)} x values ({config.shots_mode.value}, seed {config.seed})...')
        table = simulate(config)

        out_dir = self.prepare_out_dir(options['out'])
        csv_path = os.path.join(out_dir, COUNTS_CSV)
        sidecar_path = os.path.join(out_dir, SIDECAR_JSON)
        write_count_csv(table, csv_path)
        sidecar = dict(SimConfigSerializer(config).data)
        if config.exact:
            sidecar['denominator'] = settings.SHADOWFIT_EXACT_DENOMINATOR
        dump_json(sidecar, sidecar_path)
        write_manifest(out_dir, RunManifest(
            command='simulate',
            config_path=options['config'],
            outputs=[COUNTS_CSV, SIDECAR_JSON],
            seed=config.seed,
        ))

        logger.info(f'Simulated {table.total_events} events over {len(table)} x values into {csv_path}')
        self.success(f'Wrote {len(table.records)} count rows to {csv_path}')

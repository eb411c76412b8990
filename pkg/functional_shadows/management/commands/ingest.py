import json
import logging
import os

from django.core.management.base import CommandError

from functional_shadows.manifest import RunManifest, write_manifest
from functional_shadows.tables import ingest_experiment_csv, write_count_csv

from ._base import USAGE_ERROR, ShadowfitCommand

logger = logging.getLogger(__name__)

COUNTS_CSV = 'counts.csv'


class Command(ShadowfitCommand):
    help = 'Normalize an instrument count file into a long-form count table'

    def add_arguments(self, parser):
        parser.add_argument('--input', required=True, help='Instrument CSV (long or six-column wide)')
        parser.add_argument(
            '--column-map',
            help='JSON object (inline or a file path) mapping x, projector, count or H..L to source columns')
        parser.add_argument('--out', default='.', help='Output directory')

    def parse_column_map(self, value):
        if not value:
            return None
        if os.path.isfile(value):
            column_map = self.read_json_file(value, 'column_map')
        else:
            try:
                column_map = json.loads(value)
            except json.JSONDecodeError as exc:
                raise CommandError(f'--column-map: not a JSON object or file ({exc})', returncode=USAGE_ERROR)
        if not isinstance(column_map, dict):
            raise CommandError('--column-map: expected a JSON object', returncode=USAGE_ERROR)
        return column_map

    def handle(self, *args, **options):
        column_map = self.parse_column_map(options.get('column_map'))
        table = ingest_experiment_csv(options['input'], column_map)
        if table.empty_xs.size:
            self.stdout.write(self.style.WARNING(
                f'{table.empty_xs.size} x value(s) have no counts and will be excluded from fits'))

        out_dir = self.prepare_out_dir(options['out'])
        csv_path = os.path.join(out_dir, COUNTS_CSV)
        write_count_csv(table, csv_path)
        write_manifest(out_dir, RunManifest(
            command='ingest',
            config_path=options.get('column_map') if column_map and os.path.isfile(options['column_map']) else None,
            inputs=[options['input']],
            outputs=[COUNTS_CSV],
        ))
        self.success(f'Ingested {table.total_events} counts at {len(table)} x values into {csv_path}')

import argparse
import json
import logging
import os

from django.conf import settings
from django.core.management.base import CommandError

from functional_shadows.manifest import RunManifest, write_manifest
from functional_shadows.serializers import VerificationReportSerializer
from functional_shadows.verification import SUITE_TESTS, parse_suite, run_suite

from ._base import VERIFICATION_FAILURE, ShadowfitCommand

logger = logging.getLogger(__name__)


class Command(ShadowfitCommand):
    help = 'Run the Monte Carlo checks of the loss estimator; one JSON line per test'

    def add_arguments(self, parser):
        parser.add_argument(
            '--suite', default=','.join(SUITE_TESTS),
            help=f'Comma-separated tests to run (default: {",".join(SUITE_TESTS)})')
        parser.add_argument('--seed', type=int, help='Seed for every random stream')
        parser.add_argument('--replicates', type=int, help='Replicate tables per Monte Carlo test')
        parser.add_argument('--out', help='Also write the JSON lines to this file')
        parser.add_argument(
            '--no-normalization', action='store_true', help=argparse.SUPPRESS)

    def handle(self, *args, **options):
        names = parse_suite(options['suite'])
        normalize = not options.get('no_normalization', False)
        seed = settings.SHADOWFIT_DEFAULT_SEED if options.get('seed') is None else options['seed']
        if not normalize:
            logger.warning('Loss normalization disabled; unbiasedness is expected to fail')

        reports = run_suite(
            names, seed=seed, replicates=options.get('replicates'), normalize=normalize)
        lines = [
            json.dumps(VerificationReportSerializer(report).data, sort_keys=True)
            for report in reports
        ]
        for line in lines:
            self.stdout.write(line)

        if options.get('out'):
            self._write_lines(options['out'], lines, seed)

        failed = [report.name for report in reports if not report.passed]
        if failed:
            raise CommandError(
                f'{len(failed)} of {len(reports)} checks failed: {", ".join(failed)}',
                returncode=VERIFICATION_FAILURE)
        self.stderr.write(self.style.SUCCESS(f'All {len(reports)} checks passed'))

    def _write_lines(self, path, lines, seed):
        out_dir = self.prepare_out_dir(os.path.dirname(os.path.abspath(path)))
        with open(path, 'w', encoding='utf-8') as handle:
            handle.writelines(f'{line}\n' for line in lines)
        write_manifest(out_dir, RunManifest(
            command='verify',
            outputs=[os.path.basename(path)],
            seed=seed,
        ))

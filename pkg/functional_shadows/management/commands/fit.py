import logging
import os

from django.conf import settings
from django.core.management.base import CommandError

from functional_shadows.fitting import (
    OptimizerConfig,
    fit_cs,
    fit_fcs,
    reconstruction_rows,
    write_reconstruction_csv,
)
from functional_shadows.manifest import RunManifest, write_manifest
from functional_shadows.serializers import FitReportSerializer, ProfileModelSerializer
from functional_shadows.tables import read_count_csv
from functional_shadows.utils import dump_json

from ._base import USAGE_ERROR, ShadowfitCommand

logger = logging.getLogger(__name__)

REPORT_JSON = 'fit_report.json'
RECONSTRUCTION_CSV = 'reconstruction.csv'
MODEL_JSON = 'model.json'


class Command(ShadowfitCommand):
    help = 'Fit a count table pointwise (cs) or with a functional profile (fcs)'

    def add_arguments(self, parser):
        parser.add_argument('--table', required=True, help='Count table CSV (x, projector, count)')
        parser.add_argument('--method', choices=['cs', 'fcs'], default='fcs')
        parser.add_argument('--family', default='affine', help='constant, affine or poly:K')
        parser.add_argument('--phi-family', help='Family for phi when it differs from theta')
        parser.add_argument('--grid', type=int, help='Points in the dense reconstruction grid')
        parser.add_argument('--seed', type=int, help='Seed for restart perturbations')
        parser.add_argument('--restarts', type=int, help='Number of Nelder-Mead starts')
        parser.add_argument('--out', default='.', help='Output directory')

    def handle(self, *args, **options):
        theta_family = self.family_option(options['family'], '--family')
        phi_family = self.family_option(options.get('phi_family'), '--phi-family')
        grid = options.get('grid')
        grid = settings.SHADOWFIT_GRID_SIZE if grid is None else grid
        if grid < 2:
            raise CommandError('--grid must be at least 2', returncode=USAGE_ERROR)

        table = read_count_csv(options['table'])
        if table.empty_xs.size:
            message = f'Excluding {table.empty_xs.size} x value(s) with zero counts'
            logger.warning(f'{message}: {table.empty_xs.tolist()}')
            self.stdout.write(self.style.WARNING(message))

        seed = None
        if options['method'] == 'cs':
            report = fit_cs(table)
        else:
            config = OptimizerConfig.from_settings(seed=options.get('seed'), restarts=options.get('restarts'))
            seed = config.seed
            report = fit_fcs(table, theta_family, phi_family, config)
            if not report.converged:
                self.stdout.write(self.style.WARNING('Optimizer did not converge; reporting best model found'))

        out_dir = self.prepare_out_dir(options['out'])
        outputs = [REPORT_JSON, RECONSTRUCTION_CSV]
        dump_json(FitReportSerializer(report).data, os.path.join(out_dir, REPORT_JSON))
        write_reconstruction_csv(reconstruction_rows(report, grid), os.path.join(out_dir, RECONSTRUCTION_CSV))
        if report.model is not None:
            dump_json(ProfileModelSerializer(report.model).data, os.path.join(out_dir, MODEL_JSON))
            outputs.append(MODEL_JSON)
        write_manifest(out_dir, RunManifest(
            command='fit',
            inputs=[options['table']],
            outputs=outputs,
            seed=seed,
        ))

        self.success(
            f'{options["method"].upper()} fit over {len(report.points)} x values: '
            f'loss {report.global_loss:.10g}; wrote {", ".join(outputs)} to {out_dir}')

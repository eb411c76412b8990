from io import StringIO

from celery import shared_task
from django.core.management import call_command
import logging

logger = logging.getLogger(__name__)


def _options(**options):
    return {key: value for key, value in options.items() if value is not None}


@shared_task
def run_verification_suite(suite=None, seed=None, replicates=None, out=None):
    """
    Run the verification suite on a worker.
    Returns the JSON lines the command printed, one per check.
    """
    stdout = StringIO()
    try:
        call_command('verify', stdout=stdout, stderr=StringIO(),
                     **_options(suite=suite, seed=seed, replicates=replicates, out=out))
        logger.info('Verification suite passed')
        return {'status': 'success', 'reports': stdout.getvalue().splitlines()}

    except Exception as e:
        logger.error(f'Verification suite failed: {str(e)}')
        return {
            'status': 'error',
            'message': str(e),
            'returncode': getattr(e, 'returncode', None),
            'reports': stdout.getvalue().splitlines(),
        }


@shared_task
def fit_count_table(table_path, method='fcs', family='affine', out_dir='.', phi_family=None,
                    seed=None, restarts=None, grid=None):
    """
    Fit a count table CSV and write the report, reconstruction and manifest to out_dir.
    """
    try:
        call_command('fit', stdout=StringIO(), table=table_path, method=method, family=family,
                     out=out_dir, **_options(phi_family=phi_family, seed=seed, restarts=restarts, grid=grid))
        logger.info(f'{method} fit of {table_path} written to {out_dir}')
        return {'status': 'success', 'message': f'Fit written to {out_dir}', 'out_dir': out_dir}

    except Exception as e:
        logger.error(f'Error fitting {table_path}: {str(e)}')
        return {'status': 'error', 'message': str(e), 'returncode': getattr(e, 'returncode', None)}

import json
import logging
import os
import sys
from functools import partial

from django.core.management.base import BaseCommand, CommandError

from functional_shadows.exceptions import ConfigError, DomainError, PreconditionError, ShadowfitError
from functional_shadows.profiles import FamilySpec
from functional_shadows.utils import load_json

logger = logging.getLogger(__name__)

USAGE_ERROR = 1
DATA_ERROR = 2
VERIFICATION_FAILURE = 3


class ShadowfitCommand(BaseCommand):
    """Base for the shadowfit commands: library errors become exit codes."""

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.error = partial(self._usage_error, parser)
        return parser

    @staticmethod
    def _usage_error(parser, message):
        if parser.called_from_command_line:
            parser.print_usage(sys.stderr)
            parser.exit(USAGE_ERROR, f'{parser.prog}: error: {message}\n')
        raise CommandError(f'Error: {message}', returncode=USAGE_ERROR)

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except PreconditionError as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR) from exc
        except ShadowfitError as exc:
            logger.error(f'{self.__module__.rsplit(".", 1)[-1]} failed: {exc}')
            raise CommandError(str(exc), returncode=DATA_ERROR) from exc

    def family_option(self, value, flag):
        if value is None or isinstance(value, FamilySpec):
            return value
        try:
            return FamilySpec.parse(value)
        except DomainError as exc:
            raise CommandError(f'{flag}: {exc}', returncode=USAGE_ERROR) from exc

    def read_json_file(self, path, key):
        try:
            return load_json(path)
        except FileNotFoundError:
            raise ConfigError(key, f'no such file: {path}') from None
        except json.JSONDecodeError as exc:
            raise ConfigError(key, f'invalid JSON in {path}: {exc}') from exc

    def prepare_out_dir(self, path):
        os.makedirs(path, exist_ok=True)
        return path

    def success(self, message):
        self.stdout.write(self.style.SUCCESS(message))

import logging
import os
from dataclasses import dataclass, field

from django.utils import timezone

from . import __version__
from .serializers import RunManifestSerializer
from .utils import dump_json

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'


@dataclass
class RunManifest:
    """Provenance of one command run; everything except the timestamp is reproducible."""

    command: str
    config_path: str = None
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    seed: int = None
    version: str = __version__
    timestamp: object = field(default_factory=timezone.now)


def write_manifest(out_dir, manifest):
    """Write (or replace) the single manifest.json of out_dir."""
    path = os.path.join(out_dir, MANIFEST_NAME)
    dump_json(RunManifestSerializer(manifest).data, path)
    logger.debug(f'Wrote {path}')
    return path

"""Seeded synthetic count tables drawn from a true profile by Born-rule sampling.

Every (replicate, x index) pair owns an independent random stream, so tables
are identical whatever the thread count or generation order.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from django.db import models
from django.utils.translation import gettext_lazy as _

from .exceptions import DomainError, EmptyTableError
from .profiles import TrueProfile
from .qubit import BASES, PROJECTOR_BLOCH, bloch_vectors
from .tables import CountTable
from .utils import parallel_map, stream_rng

logger = logging.getLogger(__name__)

BBO_REFERENCE_LENGTH_MM = 3.0


class ShotsMode(models.TextChoices):
    FIXED_PER_SETTING = 'fixed_per_setting', _('Fixed events per basis')
    RANDOM_BASIS = 'random_basis', _('Random basis per event')
    POISSON_FRAMES = 'poisson_frames', _('Poisson counts per frame')


class Schedule(models.TextChoices):
    CYCLED = 'cycled', _('Cycled H/V, D/A, R/L')
    UNIFORM_RANDOM = 'uniform_random', _('Uniformly random')


@dataclass(frozen=True)
class SimConfig:
    """One synthetic acquisition.

    shots is m events per basis (fixed_per_setting), the total events per x
    (random_basis) or the number of frames per x (poisson_frames).
    """

    true_profile: TrueProfile
    xs: tuple
    shots_mode: ShotsMode = ShotsMode.FIXED_PER_SETTING
    shots: int = 0
    rate: float = None
    schedule: Schedule = Schedule.CYCLED
    seed: int = 0
    exact: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'xs', tuple(float(x) for x in self.xs))
        object.__setattr__(self, 'shots_mode', ShotsMode(self.shots_mode))
        object.__setattr__(self, 'schedule', Schedule(self.schedule))
        object.__setattr__(self, 'shots', int(self.shots))
        if self.rate is None:
            object.__setattr__(self, 'rate', float(settings.SHADOWFIT_POISSON_RATE))
        if not self.xs:
            raise EmptyTableError('simulation needs at least one x')
        if self.shots < 0:
            raise DomainError('shots must be nonnegative')
        if self.rate < 0:
            raise DomainError('Poisson rate must be nonnegative')


def outcome_probabilities(theta, phi):
    """Born probabilities |<p|eta>|^2 for all six projectors, shape (..., 6)."""
    return (1.0 + bloch_vectors(theta, phi) @ PROJECTOR_BLOCH.T) / 2.0


def outcome_probability(h, p):
    return float(outcome_probabilities(h.theta, h.phi)[p.position])


def ideal_fractions(profile, xs):
    """Infinite-statistics count fractions P(p)/3 at each x."""
    theta, phi = profile.angles(np.asarray(xs, dtype=float))
    return outcome_probabilities(theta, phi) / len(BASES)


def _split(total, rng, schedule):
    """Events (or frames) per basis under the chosen schedule."""
    if schedule == Schedule.CYCLED:
        return np.array([total // 3 + (basis < total % 3) for basis in range(len(BASES))])
    return rng.multinomial(total, [1.0 / len(BASES)] * len(BASES))


def _sample_point(config, probabilities, rng):
    counts = np.zeros(len(probabilities), dtype=np.int64)
    if config.shots_mode == ShotsMode.FIXED_PER_SETTING:
        per_basis = np.full(len(BASES), config.shots)
    else:
        per_basis = _split(config.shots, rng, config.schedule)

    for (first, second), events in zip(BASES, per_basis):
        if config.shots_mode == ShotsMode.POISSON_FRAMES:
            counts[first.position] = rng.poisson(config.rate * events * probabilities[first.position])
            counts[second.position] = rng.poisson(config.rate * events * probabilities[second.position])
        else:
            hits = rng.binomial(events, probabilities[first.position])
            counts[first.position] = hits
            counts[second.position] = events - hits
    return counts


def simulate(config, replicate=0):
    probabilities = outcome_probabilities(*config.true_profile.angles(np.array(config.xs)))
    if config.exact:
        denominator = settings.SHADOWFIT_EXACT_DENOMINATOR
        counts = np.rint(probabilities / len(BASES) * denominator).astype(np.int64)
        return CountTable.from_counts(config.xs, counts)
    if config.shots == 0:
        raise EmptyTableError(f'{config.shots_mode.value} with zero shots records no events')
    counts = np.array([
        _sample_point(config, row, stream_rng(config.seed, replicate, index))
        for index, row in enumerate(probabilities)
    ])
    return CountTable.from_counts(config.xs, counts)


def simulate_replicates(config, replicates):
    """Replicate tables 0..replicates-1, generated in parallel."""
    return parallel_map(lambda replicate: simulate(config, replicate), range(int(replicates)))


def bbo_profile(length_mm, x_domain, phase_intercept=math.pi, phase_slope=0.0,
                reference_length_mm=BBO_REFERENCE_LENGTH_MM):
    """Equatorial profile of an anti-diagonal input behind a birefringent crystal.

    theta is pi/2 and phi(x) = (L / L_ref)(phase_intercept + phase_slope * x),
    with the phase coefficients stated for the reference thickness.
    """
    if length_mm <= 0:
        raise DomainError(f'crystal length must be positive, got {length_mm}')
    scale = float(length_mm) / float(reference_length_mm)
    model = TrueProfile.from_affine(
        math.pi / 2.0, 0.0, scale * phase_intercept, scale * phase_slope, x_domain)
    logger.debug(f'BBO profile for L={length_mm} mm over {tuple(x_domain)}: phi coefficients {model.phi_params}')
    return model

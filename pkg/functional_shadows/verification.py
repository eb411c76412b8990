"""Monte Carlo certification of the loss estimator's guarantees.

Each check returns a VerificationReport whose verdict depends only on the
seed and the inputs.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from django.conf import settings

from .exceptions import PreconditionError
from .losses import fcs_loss, true_loss
from .profiles import FamilySpec, TrueProfile, evaluate, random_profile
from .qubit import BASES, DensityOperator, density_from_hypothesis
from .shadows import shadow_norm_sq, snapshot_fidelities
from .simulator import Schedule, ShotsMode, SimConfig, outcome_probabilities, simulate
from .utils import parallel_map, stream_rng

logger = logging.getLogger(__name__)

MEAN_SIGMAS = 4.0
VARIANCE_SIGMAS = 5.0
EXACT_TOL = 1e-10
SLOPE_WINDOW = (-0.62, -0.38)
MIN_REPLICATES = 100
MIN_SCALING_SPAN = 100.0

SUITE_TESTS = ('unbiasedness', 'variance', 'scaling')
SUITE_PAIRS = 5
SUITE_POINTS = 8
SUITE_EVENTS_PER_X = 125
SUITE_DOMAIN = (800.0, 820.0)
SUITE_STREAM = 101
HYPOTHESIS_STREAM = 211


@dataclass
class VerificationReport:
    name: str
    estimate: float
    standard_error: float
    target: float
    bound: float
    passed: bool
    replicates: int
    seed: int
    details: dict = field(default_factory=dict)


def verify_unbiasedness(true_profile, model, sim_config, replicates=2000, normalize=True):
    """Mean of fcs_loss over replicate tables against the true loss."""
    if replicates < MIN_REPLICATES:
        raise PreconditionError(f'unbiasedness needs at least {MIN_REPLICATES} replicates, got {replicates}')
    config = replace(sim_config, true_profile=true_profile)
    target = true_loss(true_profile, model, config.xs)

    if config.exact:
        losses = np.array([fcs_loss(simulate(config), model, normalize=normalize)])
        sem = 0.0
    else:
        losses = np.array(parallel_map(
            lambda replicate: fcs_loss(simulate(config, replicate), model, normalize=normalize),
            range(replicates)))
        sem = float(losses.std(ddof=1) / math.sqrt(losses.size))

    estimate = float(losses.mean())
    tolerance = MEAN_SIGMAS * sem + EXACT_TOL
    report = VerificationReport(
        name='unbiasedness',
        estimate=estimate,
        standard_error=sem,
        target=target,
        bound=tolerance,
        passed=bool(abs(estimate - target) <= tolerance),
        replicates=int(losses.size) if config.exact else int(replicates),
        seed=config.seed,
        details={
            'deviation': estimate - target,
            'normalized': normalize,
            'exact': config.exact,
            'shots_mode': config.shots_mode.value,
            'shots': config.shots,
        },
    )
    _log_verdict(report)
    return report


def _single_event_losses(true_profile, model, xs):
    """Loss 1 - <eta|rho_p|eta> and probability of every (x, p) event, flattened."""
    xs = np.asarray(xs, dtype=float)
    theta, phi = model.angles(xs)
    losses = 1.0 - snapshot_fidelities(theta, phi)
    probabilities = outcome_probabilities(*true_profile.angles(xs)) / len(BASES) / xs.size
    return losses.ravel(), probabilities.ravel()


def _variance_bound(true_profile, model, xs):
    """max_x of the squared shadow norm of eta_0(x) at rho(x), per-x values too."""
    hypotheses = [density_from_hypothesis(evaluate(model, x)) for x in xs]
    mean_trace = float(np.mean([eta.trace for eta in hypotheses]))
    shift = (mean_trace / 2.0) * DensityOperator.identity()
    per_x = [
        shadow_norm_sq(eta - shift, density_from_hypothesis(evaluate(true_profile, x)))
        for eta, x in zip(hypotheses, xs)
    ]
    return max(per_x), per_x


def verify_variance_bound(true_profile, model, xs, events=100000, seed=0, exact=False):
    """Variance of the single-event loss against the enumerated shadow-norm bound.

    Events pick x uniformly, then a basis uniformly, then an outcome by the
    Born rule. In exact mode the variance is the exact one and its SE is 0.
    """
    xs = np.asarray(xs, dtype=float)
    losses, probabilities = _single_event_losses(true_profile, model, xs)
    if exact:
        weights = probabilities
        samples = 0
    else:
        if events < 2:
            raise PreconditionError('variance estimate needs at least two events')
        counts = stream_rng(seed, 0).multinomial(int(events), probabilities / probabilities.sum())
        weights = counts / float(events)
        samples = int(events)

    mean = float(weights @ losses)
    centered = losses - mean
    variance = float(weights @ centered ** 2)
    if exact:
        standard_error = 0.0
    else:
        fourth = float(weights @ centered ** 4)
        standard_error = math.sqrt(max(0.0, fourth - variance ** 2) / samples)

    bound, per_x = _variance_bound(true_profile, model, xs)
    report = VerificationReport(
        name='variance',
        estimate=variance,
        standard_error=standard_error,
        target=bound,
        bound=bound + VARIANCE_SIGMAS * standard_error,
        passed=bool(variance <= bound + VARIANCE_SIGMAS * standard_error),
        replicates=samples,
        seed=int(seed),
        details={
            'mean_loss': mean,
            'per_x_bound': per_x,
            'exact': exact,
            'variance_source': 'enumerated' if exact else 'sampled',
            'single_event_variance': variance,
        },
    )
    _log_verdict(report)
    return report


def default_hypothesis(true_profile, family, seed):
    return random_profile(
        stream_rng(seed, HYPOTHESIS_STREAM), family, x_domain=true_profile.x_domain)


def verify_sample_scaling(true_profile, family, totals=(100, 1000, 10000), replicates=500,
                          seed=0, xs=None, model=None):
    """Log-log slope of the RMS loss-estimation error against the total event count."""
    totals = sorted(int(total) for total in totals)
    if len(totals) < 3 or totals[0] <= 0 or totals[-1] / totals[0] < MIN_SCALING_SPAN:
        raise PreconditionError(
            f'sample scaling needs at least 3 totals spanning {MIN_SCALING_SPAN:g}x, got {totals}')
    if replicates < 2:
        raise PreconditionError('sample scaling needs at least two replicates')
    if xs is None:
        xs = np.linspace(*true_profile.x_domain, 10)
    xs = tuple(float(x) for x in xs)
    if model is None:
        model = default_hypothesis(true_profile, family, seed)
    target = true_loss(true_profile, model, xs)

    rms = []
    events = []
    for position, total in enumerate(totals):
        per_x = max(1, total // len(xs))
        config = SimConfig(
            true_profile, xs, ShotsMode.RANDOM_BASIS, per_x,
            schedule=Schedule.UNIFORM_RANDOM, seed=seed)
        offset = position * replicates
        errors = np.array(parallel_map(
            lambda replicate: fcs_loss(simulate(config, offset + replicate), model) - target,
            range(replicates)))
        rms.append(float(np.sqrt(np.mean(errors ** 2))))
        events.append(per_x * len(xs))

    slope, intercept = np.polyfit(np.log(events), np.log(rms), 1)
    low, high = SLOPE_WINDOW
    report = VerificationReport(
        name='scaling',
        estimate=float(slope),
        standard_error=0.0,
        target=-0.5,
        bound=high,
        passed=bool(low <= slope <= high),
        replicates=int(replicates),
        seed=int(seed),
        details={
            'events': events,
            'rms': rms,
            'intercept': float(intercept),
            'window': [low, high],
            'family': str(family),
        },
    )
    _log_verdict(report)
    return report


def _log_verdict(report):
    if report.passed:
        logger.info(f'{report.name}: passed (estimate {report.estimate:.6g}, target {report.target:.6g})')
    else:
        logger.warning(
            f'{report.name}: FAILED (estimate {report.estimate:.6g} +/- {report.standard_error:.3g}, '
            f'target {report.target:.6g}, bound {report.bound:.6g})')


def suite_pairs(seed, count=SUITE_PAIRS):
    """Deterministic (truth, hypothesis, pair seed) triples with affine profiles."""
    affine = FamilySpec.parse('affine')
    pairs = []
    for index in range(count):
        rng = stream_rng(seed, SUITE_STREAM, index)
        truth = TrueProfile.from_model(random_profile(rng, affine, x_domain=SUITE_DOMAIN))
        hypothesis = random_profile(rng, affine, x_domain=SUITE_DOMAIN)
        pairs.append((truth, hypothesis, int(rng.integers(2 ** 32))))
    return pairs


def parse_suite(text):
    names = [name.strip() for name in str(text or '').split(',') if name.strip()]
    if not names:
        raise PreconditionError('suite selection is empty')
    unknown = [name for name in names if name not in SUITE_TESTS]
    if unknown:
        raise PreconditionError(
            f"unknown test(s) {', '.join(unknown)}; choose from {', '.join(SUITE_TESTS)}")
    return names


def run_suite(names, seed=None, replicates=None, normalize=True):
    """Run the named tests over the default random pairs, in the order given."""
    names = parse_suite(','.join(names) if not isinstance(names, str) else names)
    seed = settings.SHADOWFIT_DEFAULT_SEED if seed is None else int(seed)
    pairs = suite_pairs(seed)
    xs = tuple(np.linspace(*SUITE_DOMAIN, SUITE_POINTS))

    reports = []
    for name in names:
        if name == 'unbiasedness':
            for index, (truth, hypothesis, pair_seed) in enumerate(pairs):
                config = SimConfig(
                    truth, xs, ShotsMode.RANDOM_BASIS, SUITE_EVENTS_PER_X,
                    schedule=Schedule.UNIFORM_RANDOM, seed=pair_seed)
                report = verify_unbiasedness(
                    truth, hypothesis, config, replicates=replicates or 2000, normalize=normalize)
                report.name = f'unbiasedness[{index}]'
                reports.append(report)
        elif name == 'variance':
            for index, (truth, hypothesis, pair_seed) in enumerate(pairs):
                report = verify_variance_bound(truth, hypothesis, xs, seed=pair_seed)
                report.name = f'variance[{index}]'
                reports.append(report)
        else:
            truth, hypothesis, pair_seed = pairs[0]
            reports.append(verify_sample_scaling(
                truth, FamilySpec.parse('affine'), replicates=replicates or 500,
                seed=pair_seed, xs=xs, model=hypothesis))
    return reports

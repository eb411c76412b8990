"""Pointwise CS fits and the global FCS fit over a profile family."""
import csv
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from django.conf import settings
from numpy.polynomial import polynomial
from scipy.optimize import minimize

from .exceptions import EmptyTableError
from .losses import fcs_loss, per_x_losses
from .profiles import ProfileModel, dense_grid, pack, unpack
from .qubit import PureHypothesis
from .shadows import snapshot_bloch_vectors, snapshot_fidelities
from .utils import TWO_PI, format_float, parallel_map, stream_rng, unwrap_phases, wrap_phase

logger = logging.getLogger(__name__)

RECONSTRUCTION_COLUMNS = ('x', 'theta', 'phi', 'phi_unwrapped', 'method', 'loss')


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 8
    start_spread: float = 0.5
    xatol: float = 1e-10
    fatol: float = 1e-15
    maxiter: int = 20000
    seed: int = 0
    polish_rounds: int = 2

    @classmethod
    def from_settings(cls, **overrides):
        values = {
            'restarts': settings.SHADOWFIT_RESTARTS,
            'start_spread': settings.SHADOWFIT_START_SPREAD,
            'xatol': settings.SHADOWFIT_XATOL,
            'fatol': settings.SHADOWFIT_FATOL,
            'maxiter': settings.SHADOWFIT_MAXITER,
            'seed': settings.SHADOWFIT_DEFAULT_SEED,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


@dataclass(frozen=True)
class PointEstimate:
    x: float
    theta: float
    phi: float
    phi_unwrapped: float
    loss: float
    degenerate: bool = False
    near_pole: bool = False

    @property
    def hypothesis(self):
        return PureHypothesis(self.theta, self.phi_unwrapped)


@dataclass
class FitReport:
    method: str
    points: list
    global_loss: float
    model: ProfileModel = None
    restarts: int = 0
    iterations: int = 0
    converged: bool = True
    degenerate_xs: list = field(default_factory=list)
    near_pole_xs: list = field(default_factory=list)
    excluded_xs: list = field(default_factory=list)
    start_losses: list = field(default_factory=list)
    seed_loss: float = None

    @property
    def per_x_losses(self):
        return [point.loss for point in self.points]

    @property
    def xs(self):
        return np.array([point.x for point in self.points])


def _thresholds(tie_threshold=None, pole_tolerance=None):
    if tie_threshold is None:
        tie_threshold = settings.SHADOWFIT_TIE_THRESHOLD
    if pole_tolerance is None:
        pole_tolerance = settings.SHADOWFIT_POLE_TOLERANCE
    return tie_threshold, pole_tolerance


def _is_near_pole(theta, pole_tolerance):
    return bool(theta < pole_tolerance or theta > np.pi - pole_tolerance)


def _cs_estimate(x, fractions, tie_threshold):
    bloch = snapshot_bloch_vectors(fractions)
    norm = float(np.linalg.norm(bloch))
    if norm < tie_threshold:
        logger.warning(f'Degenerate counts at x={x!r} (|s|={norm:.3g}); returning theta=0, phi=0')
        return PureHypothesis(0.0, 0.0), True
    return PureHypothesis.from_bloch_vector(bloch), False


def cs_pointwise_fit(table, x, tie_threshold=None):
    """Closed-form minimizer of the local CS loss at x: the direction of the
    snapshot-average Bloch vector."""
    tie_threshold, _pole_tolerance = _thresholds(tie_threshold)
    hypothesis, _degenerate = _cs_estimate(x, table.fractions_at(x), tie_threshold)
    return hypothesis


def _cs_points(table, tie_threshold=None, pole_tolerance=None):
    tie_threshold, pole_tolerance = _thresholds(tie_threshold, pole_tolerance)
    xs = table.occupied_xs
    if xs.size == 0:
        raise EmptyTableError('count table has no x with recorded counts')
    estimates = [
        _cs_estimate(float(x), fractions, tie_threshold)
        for x, fractions in zip(xs, table.fractions())
    ]
    theta = np.array([h.theta for h, _ in estimates])
    phi = np.array([h.phi for h, _ in estimates])
    degenerate = np.array([flag for _, flag in estimates], dtype=bool)
    near_pole = np.array([_is_near_pole(t, pole_tolerance) for t in theta], dtype=bool)
    return xs, theta, phi, degenerate, near_pole


def fit_cs(table, tie_threshold=None, pole_tolerance=None):
    """Pointwise CS fit at every occupied x, with phi unwrapped across x."""
    xs, theta, phi, degenerate, near_pole = _cs_points(table, tie_threshold, pole_tolerance)
    unwrapped = unwrap_phases(phi)
    losses = 1.0 - np.einsum('kp,kp->k', table.fractions(), snapshot_fidelities(theta, phi))
    points = [
        PointEstimate(float(x), float(t), float(p), float(u), float(loss), bool(d), bool(n))
        for x, t, p, u, loss, d, n in zip(xs, theta, phi, unwrapped, losses, degenerate, near_pole)
    ]
    report = FitReport(
        method='cs',
        points=points,
        global_loss=float(losses.mean()),
        degenerate_xs=[float(x) for x in xs[degenerate]],
        near_pole_xs=[float(x) for x in xs[near_pole]],
        excluded_xs=[float(x) for x in table.empty_xs],
    )
    logger.info(f'CS fit over {len(points)} points: mean local loss {report.global_loss:.6g}')
    return report


def _lstsq(u, values, degree):
    vander = polynomial.polyvander(u, degree)
    coefficients, *_rest = np.linalg.lstsq(vander, values, rcond=None)
    return tuple(coefficients)


def _continue_branch(theta, phi, near_pole):
    """Signed theta and continued phi along increasing x.

    (theta, phi) and (-theta, phi + pi) are the same state; at each point the
    representative closer to the previous one is kept, so a profile that
    passes through a pole stays smooth instead of folding back into [0, pi].
    Near-pole phases are too noisy to anchor the continuation.
    """
    signed = np.array(theta, dtype=float)
    continued = np.array(phi, dtype=float)
    previous_theta = signed[0]
    previous_phi = None if near_pole[0] else continued[0]
    for k in range(1, signed.size):
        best = None
        for candidate_theta, candidate_phi in ((theta[k], phi[k]), (-theta[k], phi[k] + np.pi)):
            candidate_theta += TWO_PI * round((previous_theta - candidate_theta) / TWO_PI)
            jump = abs(candidate_theta - previous_theta)
            if previous_phi is not None:
                candidate_phi = previous_phi + math.remainder(candidate_phi - previous_phi, TWO_PI)
                if not near_pole[k]:
                    jump += abs(candidate_phi - previous_phi)
            if best is None or jump < best[0]:
                best = (jump, candidate_theta, candidate_phi)
        _jump, signed[k], continued[k] = best
        previous_theta = signed[k]
        if not near_pole[k]:
            previous_phi = continued[k]
    return signed, continued


def seed_model(table, theta_family, phi_family=None, x_domain=None):
    """Least-squares fit of the families to the pointwise CS estimates.

    The estimates are first moved onto one continuous branch. Degenerate
    points are left out of both fits, and points near a pole out of the phi
    fit, whenever other points remain.
    """
    phi_family = phi_family or theta_family
    if x_domain is None:
        x_domain = (float(table.xs.min()), float(table.xs.max())) if len(table) else (0.0, 0.0)
    xs, theta, phi, degenerate, near_pole = _cs_points(table)
    template = ProfileModel(
        (0.0,) * theta_family.n_params, (0.0,) * phi_family.n_params,
        x_domain, theta_family, phi_family)

    keep = ~degenerate if np.any(~degenerate) else np.ones_like(degenerate)
    xs, theta, phi, near_pole = xs[keep], theta[keep], phi[keep], near_pole[keep]
    theta, phi = _continue_branch(theta, phi, near_pole)
    u = template.rescale(xs)
    phi_keep = ~near_pole if np.any(~near_pole) else np.ones_like(near_pole)
    return replace(
        template,
        theta_params=_lstsq(u, theta, theta_family.degree),
        phi_params=_lstsq(u[phi_keep], phi[phi_keep], phi_family.degree),
    )


class FcsObjective:
    """fcs_loss as a function of the packed coefficient vector."""

    def __init__(self, table, template, normalize=True):
        self.template = template
        self.normalize = normalize
        xs = table.occupied_xs
        if xs.size == 0:
            raise EmptyTableError('count table has no x with recorded counts')
        self.u = template.rescale(xs)
        self.fractions = table.fractions()
        self.split = template.theta_family.n_params

    def __call__(self, vector):
        theta = polynomial.polyval(self.u, vector[:self.split])
        phi = polynomial.polyval(self.u, vector[self.split:])
        fidelity = np.einsum('kp,kp->k', self.fractions, snapshot_fidelities(theta, phi))
        if self.normalize:
            return float(1.0 - fidelity.mean())
        return float(1.0 - fidelity.sum())


@dataclass(frozen=True)
class StartResult:
    index: int
    loss: float
    vector: np.ndarray
    iterations: int
    converged: bool


def _run_start(objective, index, start, config):
    vector = np.asarray(start, dtype=float)
    loss = objective(vector)
    iterations = 0
    converged = False
    options = {
        'xatol': config.xatol,
        'fatol': config.fatol,
        'maxiter': config.maxiter,
        'maxfev': 2 * config.maxiter,
        'adaptive': vector.size > 4,
    }
    # restarting from the best vertex rebuilds a collapsed simplex
    for _round in range(1 + config.polish_rounds):
        result = minimize(objective, vector, method='Nelder-Mead', options=options)
        iterations += int(result.nit)
        converged = bool(result.success)
        if result.fun >= loss - config.fatol:
            if result.fun < loss:
                vector, loss = np.asarray(result.x, dtype=float), float(result.fun)
            break
        vector, loss = np.asarray(result.x, dtype=float), float(result.fun)
    logger.debug(f'Start {index}: loss {loss:.12g} after {iterations} iterations (converged={converged})')
    return StartResult(index, loss, vector, iterations, converged)


def fit_fcs(table, theta_family, phi_family=None, config=None, x_domain=None, normalize=True):
    """Multi-start Nelder-Mead minimization of the FCS loss.

    Start 0 is the CS-seeded least-squares model; the others perturb it with
    Gaussian noise drawn from stream (seed, start). The first start reaching
    the lowest loss wins, so results do not depend on thread count.
    """
    config = config or OptimizerConfig.from_settings()
    phi_family = phi_family or theta_family
    seed = seed_model(table, theta_family, phi_family, x_domain)
    objective = FcsObjective(table, seed, normalize=normalize)
    seed_vector = pack(seed)
    seed_loss = objective(seed_vector)

    restarts = max(1, int(config.restarts))
    starts = [seed_vector]
    for index in range(1, restarts):
        noise = stream_rng(config.seed, index).normal(0.0, config.start_spread, size=seed_vector.size)
        starts.append(seed_vector + noise)

    results = parallel_map(
        lambda item: _run_start(objective, item[0], item[1], config), list(enumerate(starts)))
    best = min(results, key=lambda result: (result.loss, result.index))
    vector = best.vector if best.loss <= seed_loss else seed_vector
    model = unpack(seed, vector)

    converged = any(result.converged for result in results)
    if not converged:
        logger.warning(f'FCS fit did not converge within {config.maxiter} iterations from any start')

    report = _fcs_report(table, model, results, seed_loss, converged, normalize)
    logger.info(
        f'FCS fit ({theta_family}/{phi_family}) over {len(report.points)} points: '
        f'loss {report.global_loss:.10g} from start {best.index} (seed loss {seed_loss:.10g})')
    return report


def _fcs_report(table, model, results, seed_loss, converged, normalize):
    _tie_threshold, pole_tolerance = _thresholds()
    xs, _theta, _phi, degenerate, _near_pole = _cs_points(table)
    theta, phi = model.angles(xs)
    losses = per_x_losses(table, model)
    near_pole = np.array([_is_near_pole(t, pole_tolerance) for t in theta], dtype=bool)
    points = [
        PointEstimate(float(x), float(t), float(wrap_phase(p)), float(p), float(loss), bool(d), bool(n))
        for x, t, p, loss, d, n in zip(xs, theta, phi, losses, degenerate, near_pole)
    ]
    return FitReport(
        method='fcs',
        points=points,
        global_loss=fcs_loss(table, model, normalize=normalize),
        model=model,
        restarts=len(results),
        iterations=sum(result.iterations for result in results),
        converged=converged,
        degenerate_xs=[float(x) for x in xs[degenerate]],
        near_pole_xs=[float(x) for x in xs[near_pole]],
        excluded_xs=[float(x) for x in table.empty_xs],
        start_losses=[result.loss for result in results],
        seed_loss=seed_loss,
    )


def reconstruct_grid(model, size=None):
    """(x, theta, phi wrapped, phi unwrapped) on an even grid over the model domain."""
    size = settings.SHADOWFIT_GRID_SIZE if size is None else int(size)
    xs = dense_grid(model, size)
    theta, phi = model.angles(xs)
    return xs, theta, wrap_phase(phi), phi


def reconstruction_rows(report, grid_size=None):
    """Plot rows: one per occupied x for CS, one per grid point for FCS."""
    if report.method == 'fcs':
        xs, theta, phi, unwrapped = reconstruct_grid(report.model, grid_size)
        return [
            (float(x), float(t), float(p), float(u), 'fcs', report.global_loss)
            for x, t, p, u in zip(xs, theta, phi, unwrapped)
        ]
    return [
        (point.x, point.theta, point.phi, point.phi_unwrapped, report.method, point.loss)
        for point in report.points
    ]


def write_reconstruction_csv(rows, path):
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(RECONSTRUCTION_COLUMNS)
        for x, theta, phi, unwrapped, method, loss in rows:
            writer.writerow((
                format_float(x), format_float(theta), format_float(phi),
                format_float(unwrapped), method, format_float(loss),
            ))

"""Shadow-based losses: local CS, global FCS, the true-loss oracle and mixed-state selection."""
import logging

import numpy as np

from .exceptions import DomainError, EmptyTableError, PreconditionError
from .qubit import helstrom_projector, pure_fidelity, trace_product
from .profiles import evaluate
from .shadows import snapshot_average, snapshot_fidelities

logger = logging.getLogger(__name__)

WEIGHT_TOL = 1e-9


def _fidelity_sum(fractions, theta, phi):
    return np.einsum('...p,...p->...', fractions, snapshot_fidelities(theta, phi))


def local_cs_loss(table, x, h):
    """1 - sum_p (n_p/N) <eta|rho_p|eta> at a single x."""
    fractions = table.fractions_at(x)
    return float(1.0 - _fidelity_sum(fractions, h.theta, h.phi))


def per_x_losses(table, model):
    """Local losses of the model's hypotheses at every occupied x."""
    xs = table.occupied_xs
    if xs.size == 0:
        raise EmptyTableError('count table has no x with recorded counts')
    theta, phi = model.angles(xs)
    return 1.0 - _fidelity_sum(table.fractions(), theta, phi)


def fcs_loss(table, model, normalize=True):
    """Global loss averaged over the occupied x values, each weighted equally.

    With normalize=False the per-x fidelity sums are added without the
    1/|X| factor.
    """
    xs = table.occupied_xs
    if xs.size == 0:
        raise EmptyTableError('count table has no x with recorded counts')
    theta, phi = model.angles(xs)
    fidelity = _fidelity_sum(table.fractions(), theta, phi)
    if normalize:
        return float(1.0 - fidelity.mean())
    return float(1.0 - fidelity.sum())


def uniform_weights(xs):
    return np.full(len(xs), 1.0 / len(xs))


def true_loss(true_profile, model, xs, weights=None):
    """1 - sum_i w_i F(rho(x_i), eta(x_i)) for pure truth and hypothesis."""
    xs = np.asarray(xs, dtype=float).ravel()
    if xs.size == 0:
        raise DomainError('true loss needs at least one x')
    weights = uniform_weights(xs) if weights is None else np.asarray(weights, dtype=float).ravel()
    if weights.size != xs.size:
        raise DomainError(f'{weights.size} weights for {xs.size} x values')
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > WEIGHT_TOL:
        raise DomainError('weights must be a probability vector')
    fidelities = np.array([
        pure_fidelity(evaluate(true_profile, x), evaluate(model, x)) for x in xs
    ])
    return float(1.0 - weights @ fidelities)


def mixed_loss_terms(table, pair):
    """Count-weighted estimate of mean_x tr[Pi(x) rho(x)] for a pair of hypotheses.

    pair holds two callables x -> DensityOperator; Pi(x) is the Helstrom
    projector of their difference at x.
    """
    first, second = pair
    xs = table.occupied_xs
    if xs.size == 0:
        raise EmptyTableError('count table has no x with recorded counts')
    terms = [
        trace_product(helstrom_projector(first(x), second(x)), snapshot_average(fractions))
        for x, fractions in zip(xs, table.fractions())
    ]
    return float(np.mean(terms))


def selection_statistics(table, hypotheses):
    """Worst Helstrom-test deviation of every candidate from the data.

    For candidate j this is max over pairs h<k of
    |mean_x tr[Pi_hk eta_j] - mixed_loss_terms(table, (eta_h, eta_k))|.
    A single candidate has statistic 0.
    """
    hypotheses = list(hypotheses)
    if not hypotheses:
        raise PreconditionError('hypothesis list is empty')
    xs = table.occupied_xs
    if xs.size == 0:
        raise EmptyTableError('count table has no x with recorded counts')
    statistics = np.zeros(len(hypotheses))
    for h in range(len(hypotheses)):
        for k in range(h + 1, len(hypotheses)):
            pair = (hypotheses[h], hypotheses[k])
            observed = mixed_loss_terms(table, pair)
            projectors = [helstrom_projector(pair[0](x), pair[1](x)) for x in xs]
            for j, candidate in enumerate(hypotheses):
                predicted = np.mean([
                    trace_product(projector, candidate(x)) for projector, x in zip(projectors, xs)
                ])
                statistics[j] = max(statistics[j], abs(predicted - observed))
    return statistics


def select_mixed_hypothesis(table, hypotheses):
    """Index of the candidate with the smallest selection statistic; ties go to the lowest index."""
    statistics = selection_statistics(table, hypotheses)
    index = int(np.argmin(statistics))
    logger.debug(f'Mixed-state selection statistics {statistics.tolist()}; chose {index}')
    return index

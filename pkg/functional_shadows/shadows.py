"""Classical-shadow machinery for random Pauli (Stokes-basis) measurements.

The measurement channel picks one of the three Stokes bases with weight 1/3
and records the projector that clicked. Every expectation here is an exact
enumeration over the 3 bases x 2 outcomes.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .qubit import (
    BASES,
    DensityOperator,
    Projector,
)

BASIS_WEIGHT = 1.0 / 3.0


def projector_operator(p):
    return DensityOperator.from_ket(p.ket)


def apply_channel(rho):
    """The measurement channel M(rho), summed over bases and outcomes."""
    total = DensityOperator.zero()
    for basis in BASES:
        for outcome in basis:
            probability = rho.expectation(outcome.ket)
            total = total + (BASIS_WEIGHT * probability) * projector_operator(outcome)
    return total


def invert_channel(operator):
    """M^-1(O) = 3O - tr(O) I, the inverse of the channel for any trace."""
    return 3.0 * operator - operator.trace * DensityOperator.identity()


@dataclass(frozen=True)
class ClassicalSnapshot:
    operator: DensityOperator
    source_projector: Projector


def snapshot_from_outcome(p):
    """Snapshot 2|p><p| - |p_perp><p_perp| for a click on projector p."""
    return ClassicalSnapshot(invert_channel(projector_operator(p)), p)


def snapshot_fidelities(theta, phi):
    """<eta|rho_p|eta> for every projector p, shape (..., 6), order H V D A R L.

    Closed forms for the pure state cos(t/2)|H> + e^{i p} sin(t/2)|V>; each
    value lies in [-1, 2].
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    cos_theta = np.cos(theta)
    sin_theta = np.sin(theta)
    diagonal = np.cos(phi) * sin_theta
    circular = np.sin(phi) * sin_theta
    return np.stack([
        (1.0 + 3.0 * cos_theta) / 2.0,
        (1.0 - 3.0 * cos_theta) / 2.0,
        (1.0 + 3.0 * diagonal) / 2.0,
        (1.0 - 3.0 * diagonal) / 2.0,
        (1.0 + 3.0 * circular) / 2.0,
        (1.0 - 3.0 * circular) / 2.0,
    ], axis=-1)


def snapshot_fidelity(h, p):
    return float(snapshot_fidelities(h.theta, h.phi)[p.position])


def snapshot_bloch_vectors(fractions):
    """Bloch vectors (..., 3) of count-weighted snapshot averages.

    fractions has shape (..., 6) in projector order; the average snapshot
    sum_p f_p rho_p has Bloch vector 3 (f_D - f_A, f_R - f_L, f_H - f_V).
    """
    f = np.asarray(fractions, dtype=float)
    return 3.0 * np.stack([
        f[..., 2] - f[..., 3],
        f[..., 4] - f[..., 5],
        f[..., 0] - f[..., 1],
    ], axis=-1)


def snapshot_average(fractions):
    """sum_p f_p rho_p for one row of count fractions."""
    fractions = np.asarray(fractions, dtype=float)
    return DensityOperator.from_bloch(snapshot_bloch_vectors(fractions), trace=float(fractions.sum()))


def expected_snapshot(rho):
    """Probability-weighted snapshot average over every basis and outcome."""
    total = DensityOperator.zero()
    for basis in BASES:
        for outcome in basis:
            probability = rho.expectation(outcome.ket)
            total = total + (BASIS_WEIGHT * probability) * snapshot_from_outcome(outcome).operator
    return total


def shadow_norm_sq(operator, rho):
    """Squared x-shadow-norm of an operator at the plug-in state rho.

    E_U sum_b <b|U rho U^dag|b> (<b|U M^-1(O) U^dag|b>)^2, enumerated exactly.
    """
    if not rho.is_physical():
        raise DomainError('shadow norm needs a physical plug-in state')
    inverted = invert_channel(operator)
    total = 0.0
    for basis in BASES:
        for outcome in basis:
            probability = rho.expectation(outcome.ket)
            total += BASIS_WEIGHT * probability * inverted.expectation(outcome.ket) ** 2
    return max(0.0, total)


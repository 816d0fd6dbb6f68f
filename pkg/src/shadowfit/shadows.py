"""Classical shadows for the six-projector Pauli measurement of one qubit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .qubit import (
    BASES,
    IDENTITY,
    Projector,
    PureHypothesis,
    is_physical,
    projector_matrix,
)

# each of the three bases is picked with weight 1/3
BASIS_WEIGHT = 1.0 / 3.0

_PROJECTOR_MATRICES = np.array([projector_matrix(p) for p in Projector])


@dataclass(frozen=True)
class ClassicalSnapshot:
    operator: np.ndarray
    source_projector: Projector

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.operator)))


def apply_channel(rho: np.ndarray) -> np.ndarray:
    """Average post-measurement projector, enumerated over bases and outcomes."""
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros((2, 2), dtype=complex)
    for basis in BASES:
        for p in basis:
            proj = _PROJECTOR_MATRICES[p]
            prob = np.trace(proj @ rho)
            out += BASIS_WEIGHT * prob * proj
    return out


def invert_channel(op: np.ndarray) -> np.ndarray:
    """``3 O - tr(O) 1``; reduces to ``3 O - 1`` on unit-trace inputs."""
    op = np.asarray(op, dtype=complex)
    return 3.0 * op - np.trace(op) * IDENTITY


def snapshot_from_outcome(p: Projector) -> ClassicalSnapshot:
    p = Projector(p)
    op = 2.0 * _PROJECTOR_MATRICES[p] - _PROJECTOR_MATRICES[p.partner]
    return ClassicalSnapshot(op, p)


SNAPSHOTS = np.array([snapshot_from_outcome(p).operator for p in Projector])


def snapshot_fidelities(theta, phi) -> np.ndarray:
    """Closed-form ``<eta|snapshot_p|eta>`` for all six projectors.

    Broadcasts over ``theta`` and ``phi``; the trailing axis of the result
    follows :class:`Projector` order.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    c2 = np.cos(theta / 2) ** 2
    s2 = np.sin(theta / 2) ** 2
    sin_t = np.sin(theta)
    x = 3.0 * np.cos(phi) * sin_t
    y = 3.0 * np.sin(phi) * sin_t
    return np.stack(
        np.broadcast_arrays(
            2 * c2 - s2,
            2 * s2 - c2,
            (1 + x) / 2,
            (1 - x) / 2,
            (1 + y) / 2,
            (1 - y) / 2,
        ),
        axis=-1,
    )


def snapshot_fidelity(h: PureHypothesis, p: Projector) -> float:
    return float(snapshot_fidelities(h.theta, h.phi)[Projector(p)])


def shadow_norm_sq(op: np.ndarray, rho: np.ndarray) -> float:
    """State-dependent shadow norm squared of ``op`` at the state ``rho``.

    Enumerates the three bases and both outcomes: the Born probability of
    each outcome times the squared expectation of the inverted operator.
    """
    if not is_physical(rho, atol=1e-10):
        raise DomainError("rho is not a physical state")
    rho = np.asarray(rho, dtype=complex)
    inverted = invert_channel(op)
    total = 0.0
    for basis in BASES:
        for p in basis:
            proj = _PROJECTOR_MATRICES[p]
            prob = np.real(np.trace(proj @ rho))
            value = np.real(np.trace(proj @ inverted))
            total += BASIS_WEIGHT * prob * value**2
    return float(total)

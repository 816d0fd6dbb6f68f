"""Shadow-based losses: local (per x), global (whole table) and true loss."""

from __future__ import annotations

import warnings

import numpy as np

from .data import CountTable
from .errors import DataError
from .models import ProfileModel
from .qubit import PureHypothesis, bloch_vector, helstrom_projector, pure_fidelity
from .shadows import SNAPSHOTS, snapshot_fidelities

TIE_THRESHOLD = 1e-9


def local_cs_loss(table: CountTable, x: float, h: PureHypothesis) -> float:
    """``1 - sum_p (n_p / N) F(eta, snapshot_p)`` at a single x."""
    row = table.counts[table.row_index(x)]
    total = row.sum()
    if total <= 0:
        raise DataError(f"no counts at x={x!r}")
    fid = snapshot_fidelities(h.theta, h.phi)
    return float(1.0 - np.dot(row / total, fid))


def local_losses(table: CountTable, theta, phi) -> np.ndarray:
    """Local losses at every occupied x for per-x angle arrays."""
    fid = snapshot_fidelities(theta, phi)
    return 1.0 - np.einsum("ij,ij->i", table.fractions(), fid)


def empirical_snapshot_means(table: CountTable) -> np.ndarray:
    """Count-weighted snapshot average at each occupied x, shape ``(n, 2, 2)``."""
    return np.einsum("ip,pab->iab", table.fractions(), SNAPSHOTS)


def cs_pointwise_angles(table: CountTable, tie_threshold: float = TIE_THRESHOLD):
    """Closed-form minimizers of the local loss at every occupied x.

    Returns ``(theta, phi, bloch_norm, degenerate)`` arrays. The minimizer
    is the pure state along the Bloch vector of the empirical snapshot
    average; degenerate rows (vanishing Bloch vector) get ``theta = phi = 0``.
    """
    means = empirical_snapshot_means(table)
    s = np.array([bloch_vector(m) for m in means]).reshape(-1, 3)
    norm = np.linalg.norm(s, axis=1)
    degenerate = norm < tie_threshold
    safe = np.where(degenerate, 1.0, norm)
    theta = np.where(degenerate, 0.0, np.arccos(np.clip(s[:, 2] / safe, -1.0, 1.0)))
    phi = np.where(degenerate, 0.0, np.mod(np.arctan2(s[:, 1], s[:, 0]), 2 * np.pi))
    return theta, phi, norm, degenerate


def cs_pointwise_fit(table: CountTable, x: float, tie_threshold: float = TIE_THRESHOLD) -> PureHypothesis:
    i = table.row_index(x)
    if table.counts[i].sum() <= 0:
        raise DataError(f"no counts at x={x!r}")
    sub = CountTable(table.xs[i : i + 1], table.counts[i : i + 1])
    theta, phi, _, degenerate = cs_pointwise_angles(sub, tie_threshold)
    if degenerate[0]:
        warnings.warn(f"empirical Bloch vector vanishes at x={x!r}; returning theta=phi=0", stacklevel=2)
    return PureHypothesis(float(theta[0]), float(phi[0]))


def fcs_loss(table: CountTable, model: ProfileModel, *, normalize: bool = True) -> float:
    """Global loss averaged over occupied x points, each weighted equally.

    ``normalize=False`` drops the ``1/|X|`` factor; it exists only as a
    negative control for the verification suite.
    """
    mask = table.occupied
    if not mask.any():
        raise DataError("table has no x with nonzero counts")
    theta, phi = model.angles(table.xs[mask])
    per_x = np.einsum("ij,ij->i", table.fractions(), snapshot_fidelities(theta, phi))
    if normalize:
        return float(1.0 - per_x.mean())
    return float(1.0 - per_x.sum())


def true_loss(true_profile: ProfileModel, model: ProfileModel, xs, weights=None) -> float:
    """``1 - sum_i w_i F(rho(x_i), eta(x_i))``; uniform weights by default."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if weights is None:
        weights = np.full(xs.size, 1.0 / xs.size)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != xs.shape:
        raise ValueError(f"{weights.size} weights for {xs.size} points")
    if not np.isclose(weights.sum(), 1.0, rtol=0, atol=1e-12) or np.any(weights < 0):
        raise ValueError("weights must be a probability vector")
    fid = np.array([pure_fidelity(true_profile.evaluate(x), model.evaluate(x)) for x in xs])
    return float(1.0 - np.dot(weights, fid))


def _pair_statistic(table: CountTable, eta_h, eta_k, candidate) -> float:
    """Mean over occupied x of ``tr[Pi_hk (candidate - snapshot average)]``."""
    xs = table.xs[table.occupied]
    means = empirical_snapshot_means(table)
    total = 0.0
    for x, m in zip(xs, means):
        proj = helstrom_projector(eta_h(x), eta_k(x))
        total += np.real(np.trace(proj @ (candidate(x) - m)))
    return float(total / xs.size)


def mixed_loss_terms(table: CountTable, pair) -> float:
    """Helstrom-projector statistic of the first function of ``pair``.

    ``pair`` holds two callables ``x -> density operator``. The value is the
    x-averaged ``tr[Pi (eta_1 - snapshot average)]`` with ``Pi`` the Helstrom
    projector of ``eta_1 - eta_2``.
    """
    eta_h, eta_k = pair
    return _pair_statistic(table, eta_h, eta_k, eta_h)


def select_mixed_hypothesis(table: CountTable, hypotheses) -> int:
    """Minimum-distance choice among mixed-state hypothesis functions.

    Each candidate is scored by the largest absolute Helstrom statistic over
    all hypothesis pairs; the lowest score wins, ties going to the lowest
    index.
    """
    hypotheses = list(hypotheses)
    if not hypotheses:
        raise ValueError("empty hypothesis list")
    n = len(hypotheses)
    pairs = [(h, k) for h in range(n) for k in range(h + 1, n)]
    scores = []
    for cand in hypotheses:
        worst = 0.0
        for h, k in pairs:
            stat = abs(_pair_statistic(table, hypotheses[h], hypotheses[k], cand))
            worst = max(worst, stat)
        scores.append(worst)
    return int(np.argmin(scores))

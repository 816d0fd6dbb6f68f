"""Pointwise (CS) and functional (FCS) reconstruction of angle profiles."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import minimize

from .data import CountTable
from .errors import DataError
from .loss import TIE_THRESHOLD, cs_pointwise_angles, fcs_loss, local_losses
from .models import ProfileModel, parse_family
from .shadows import snapshot_fidelities

logger = logging.getLogger(__name__)

POLE_TOL = 1e-2
LOW_SIGNAL = 0.1


@dataclass
class OptimizerConfig:
    """Multi-start Nelder-Mead settings."""

    restarts: int = 8
    seed: int = 0
    spread: float = 0.5
    simplex_step: float = 0.2
    xatol: float = 1e-10
    fatol: float = 1e-15
    max_evaluations: int = 20000
    threads: int = 1


@dataclass
class FitReport:
    method: str
    xs: list
    theta: list
    phi: list
    per_x_loss: list
    global_loss: float
    model: dict | None = None
    restarts: int = 0
    iterations: int = 0
    evaluations: int = 0
    converged: bool = True
    start_losses: list = field(default_factory=list)
    best_start: int | None = None
    pole_xs: list = field(default_factory=list)
    low_signal_xs: list = field(default_factory=list)
    degenerate_xs: list = field(default_factory=list)

    @property
    def profile(self) -> ProfileModel | None:
        return None if self.model is None else ProfileModel.from_dict(self.model)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _flags(xs, theta, norm, degenerate):
    pole = ((theta < POLE_TOL) | (theta > np.pi - POLE_TOL)) & ~degenerate
    return (
        [float(x) for x in xs[pole]],
        [float(x) for x in xs[norm < LOW_SIGNAL]],
        [float(x) for x in xs[degenerate]],
    )


def fit_cs(table: CountTable, tie_threshold: float = TIE_THRESHOLD) -> FitReport:
    """Independent closed-form fit at each occupied x."""
    occ = table.occupied_table()
    if len(occ) == 0:
        raise DataError("table has no x with nonzero counts")
    skipped = len(table) - len(occ)
    if skipped:
        logger.warning("ignoring %d x value(s) with zero counts", skipped)
    theta, phi, norm, degenerate = cs_pointwise_angles(occ, tie_threshold)
    if degenerate.any():
        logger.warning("empirical Bloch vector vanishes at %d x value(s)", int(degenerate.sum()))
    losses = local_losses(occ, theta, phi)
    pole, low, degen = _flags(occ.xs, theta, norm, degenerate)
    return FitReport(
        method="cs",
        xs=occ.xs.tolist(),
        theta=theta.tolist(),
        phi=np.unwrap(phi).tolist(),
        per_x_loss=losses.tolist(),
        global_loss=float(losses.mean()),
        pole_xs=pole,
        low_signal_xs=low,
        degenerate_xs=degen,
    )


def seed_model(table: CountTable, theta_degree: int, phi_degree: int) -> ProfileModel:
    """Least-squares polynomial fit to the pointwise CS angles.

    Phases are unwrapped along increasing x before fitting and weighted by
    ``sin(theta)`` so that near-pole points, where phi is ill-defined, barely
    pull the fit. Degenerate points are left out.
    """
    occ = table.occupied_table()
    domain = (float(occ.xs[0]), float(occ.xs[-1]))
    theta, phi, _, degenerate = cs_pointwise_angles(occ)
    keep = ~degenerate
    if not keep.any():
        return ProfileModel(np.zeros(theta_degree + 1), np.zeros(phi_degree + 1), domain)
    shape = ProfileModel((0.0,), (0.0,), domain)
    t = shape.rescale(occ.xs[keep])
    theta, phi = theta[keep], np.unwrap(phi[keep])
    theta_coef = _weighted_polyfit(t, theta, theta_degree, np.ones_like(t))
    phi_coef = _weighted_polyfit(t, phi, phi_degree, np.sin(theta) + 1e-6)
    return ProfileModel(theta_coef, phi_coef, domain)


def _weighted_polyfit(t, y, degree, weights):
    vander = P.polyvander(t, degree) * weights[:, None]
    coef, *_ = np.linalg.lstsq(vander, y * weights, rcond=None)
    return coef


class _Objective:
    """Fast global loss on a flat coefficient vector."""

    def __init__(self, table: CountTable, template: ProfileModel):
        occ = table.occupied_table()
        self.fractions = occ.fractions()
        self.t = template.rescale(occ.xs)
        self.split = len(template.theta_params)

    def __call__(self, vector):
        theta = P.polyval(self.t, vector[: self.split])
        phi = P.polyval(self.t, vector[self.split :])
        fid = snapshot_fidelities(theta, phi)
        return 1.0 - np.einsum("ij,ij->i", self.fractions, fid).mean()


def fit_fcs(
    table: CountTable,
    family: str | int = "affine",
    config: OptimizerConfig | None = None,
    *,
    phi_family: str | int | None = None,
) -> FitReport:
    """Minimize the global loss over a polynomial family.

    Start 0 is the least-squares seed from the pointwise CS fit; the other
    starts perturb it with a fixed-seed generator. Starts may run in threads
    but the result does not depend on it: the best start wins and ties go to
    the lowest start index.
    """
    config = config or OptimizerConfig()
    theta_degree = parse_family(family) if isinstance(family, str) else int(family)
    if phi_family is None:
        phi_degree = theta_degree
    else:
        phi_degree = parse_family(phi_family) if isinstance(phi_family, str) else int(phi_family)
    occ = table.occupied_table()
    if len(occ) == 0:
        raise DataError("table has no x with nonzero counts")
    skipped = len(table) - len(occ)
    if skipped:
        logger.warning("ignoring %d x value(s) with zero counts", skipped)

    seed = seed_model(occ, theta_degree, phi_degree)
    objective = _Objective(occ, seed)
    x0 = seed.pack()
    rng = np.random.default_rng(config.seed)
    starts = [x0] + [x0 + rng.normal(0.0, config.spread, x0.size) for _ in range(config.restarts - 1)]

    def run(start):
        simplex = np.vstack([start, start + config.simplex_step * np.eye(start.size)])
        return minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": config.xatol,
                "fatol": config.fatol,
                "maxfev": config.max_evaluations,
                "maxiter": config.max_evaluations,
            },
        )

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]

    start_losses = [float(r.fun) for r in results]
    best = int(np.argmin(start_losses))
    model = seed.unpack(results[best].x)

    theta, phi = model.angles(occ.xs)
    _, _, norm, degenerate = cs_pointwise_angles(occ)
    pole, low, degen = _flags(occ.xs, theta, norm, degenerate)
    converged = any(r.success for r in results)
    if not converged:
        logger.warning("no Nelder-Mead start converged within %d evaluations", config.max_evaluations)
    return FitReport(
        method="fcs",
        xs=occ.xs.tolist(),
        theta=theta.tolist(),
        phi=phi.tolist(),
        per_x_loss=local_losses(occ, theta, phi).tolist(),
        global_loss=fcs_loss(occ, model),
        model=model.to_dict(),
        restarts=len(starts),
        iterations=int(sum(r.nit for r in results)),
        evaluations=int(sum(r.nfev for r in results)),
        converged=converged,
        start_losses=start_losses,
        best_start=best,
        pole_xs=pole,
        low_signal_xs=low,
        degenerate_xs=degen,
    )

"""Monte Carlo checks of the estimator's bias, variance and sample scaling."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import CountTable
from .fit import OptimizerConfig, fit_cs, fit_fcs
from .loss import fcs_loss, true_loss
from .models import ProfileModel
from .qubit import IDENTITY
from .shadows import shadow_norm_sq, snapshot_fidelities
from .simulate import SimConfig, sample_events, simulate, stream

MEAN_SIGMAS = 4.0
VARIANCE_SIGMAS = 5.0
SLOPE_WINDOW = (-0.62, -0.38)
WIN_FRACTION = 0.9


@dataclass
class VerificationReport:
    test: str
    estimate: float
    se: float | None
    bound: float
    passed: bool
    replicates: int
    seed: int
    details: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _map(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def verify_unbiasedness(
    config: SimConfig,
    model: ProfileModel,
    replicates: int = 2000,
    *,
    threads: int = 1,
    normalize: bool = True,
) -> VerificationReport:
    """Mean global loss over replicate tables against the true loss.

    Passes when the gap is within ``4 * SEM`` (plus ``1e-10`` so that the
    noiseless exact mode, where SEM is zero, is judged on rounding alone).
    """
    if replicates < 100:
        raise ValueError("need at least 100 replicates")
    losses = np.array(
        _map(lambda r: fcs_loss(simulate(config, r), model, normalize=normalize), range(replicates), threads)
    )
    target = true_loss(config.true_profile, model, config.xs)
    mean = float(losses.mean())
    sem = float(losses.std(ddof=1) / np.sqrt(replicates))
    gap = abs(mean - target)
    return VerificationReport(
        test="unbiasedness",
        estimate=mean,
        se=sem,
        bound=target,
        passed=bool(gap <= MEAN_SIGMAS * sem + 1e-10),
        replicates=replicates,
        seed=int(config.seed),
        details={"gap": gap, "tolerance_sigmas": MEAN_SIGMAS, "normalized": normalize},
    )


def centered_hypotheses(model: ProfileModel, xs) -> np.ndarray:
    """``eta(x) - E_x[tr eta(x)] 1/2`` for each x (uniform over ``xs``)."""
    etas = model.densities(xs)
    mean_trace = np.real(np.trace(etas, axis1=1, axis2=2)).mean()
    return etas - mean_trace * IDENTITY / 2


def variance_bound(true_profile: ProfileModel, model: ProfileModel, xs):
    """Exact ``(max_x, mean_x)`` of the shadow norm squared of the centred hypothesis."""
    xs = np.asarray(xs, dtype=float)
    norms = [shadow_norm_sq(op, rho) for op, rho in zip(centered_hypotheses(model, xs), true_profile.densities(xs))]
    return float(np.max(norms)), float(np.mean(norms))


def single_event_losses(true_profile, model, xs, n_events, rng) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    x_idx, proj = sample_events(true_profile, xs, n_events, rng)
    theta, phi = model.angles(xs)
    fid = snapshot_fidelities(theta, phi)
    return 1.0 - fid[x_idx, proj]


def verify_variance_bound(
    true_profile: ProfileModel,
    model: ProfileModel,
    xs,
    n_events: int = 200_000,
    seed: int = 0,
) -> VerificationReport:
    """Single-event loss variance against the max-over-x shadow norm.

    The standard error of the sample variance uses the fourth central
    moment of the sampled losses.
    """
    losses = single_event_losses(true_profile, model, xs, n_events, stream(seed, 0, 0))
    var = float(losses.var(ddof=1))
    m4 = float(np.mean((losses - losses.mean()) ** 4))
    se = float(np.sqrt(max(m4 - var**2, 0.0) / n_events))
    bound, mean_bound = variance_bound(true_profile, model, xs)
    return VerificationReport(
        test="variance_bound",
        estimate=var,
        se=se,
        bound=bound,
        passed=bool(var <= bound + VARIANCE_SIGMAS * se),
        replicates=n_events,
        seed=int(seed),
        details={"mean_x_bound": mean_bound, "tolerance_sigmas": VARIANCE_SIGMAS},
    )


def verify_sample_scaling(
    true_profile: ProfileModel,
    model: ProfileModel,
    xs,
    totals=(100, 1000, 10000),
    replicates: int = 500,
    seed: int = 0,
    *,
    threads: int = 1,
) -> VerificationReport:
    """Log-log slope of the RMS loss-estimation error against total events.

    Events are spread evenly over ``xs`` with a uniformly random basis per
    event.
    """
    totals = sorted(int(t) for t in totals)
    xs = tuple(float(x) for x in xs)
    if len(totals) < 3 or totals[-1] < 100 * totals[0]:
        raise ValueError("need at least 3 totals spanning two decades")
    if totals[0] < len(xs):
        raise ValueError("smallest total must give every x at least one event")
    target = true_loss(true_profile, model, xs)
    rms = []
    for k, total in enumerate(totals):
        config = SimConfig(true_profile, xs, shots_mode="random_basis", shots=total // len(xs), seed=seed + k)
        errs = np.array(_map(lambda r: fcs_loss(simulate(config, r), model) - target, range(replicates), threads))
        rms.append(float(np.sqrt(np.mean(errs**2))))
    slope, intercept = np.polyfit(np.log(totals), np.log(rms), 1)
    lo, hi = SLOPE_WINDOW
    return VerificationReport(
        test="sample_scaling",
        estimate=float(slope),
        se=None,
        bound=-0.5,
        passed=bool(lo <= slope <= hi),
        replicates=replicates,
        seed=int(seed),
        details={"totals": totals, "rms": rms, "window": list(SLOPE_WINDOW), "intercept": float(intercept)},
    )


def wrapped_difference(a, b) -> np.ndarray:
    return np.angle(np.exp(1j * (np.asarray(a) - np.asarray(b))))


def phase_errors(table: CountTable, true_profile: ProfileModel, family="affine", optimizer=None):
    """RMS phase error of the CS and FCS reconstructions on one table."""
    cs = fit_cs(table)
    fcs = fit_fcs(table, family, optimizer)
    xs = np.array(cs.xs)
    _, phi_true = true_profile.angles(xs)
    cs_err = np.sqrt(np.mean(wrapped_difference(cs.phi, phi_true) ** 2))
    fcs_err = np.sqrt(np.mean(wrapped_difference(fcs.phi, phi_true) ** 2))
    return float(cs_err), float(fcs_err)


def compare_methods(
    config: SimConfig,
    replicates: int = 200,
    family="affine",
    optimizer: OptimizerConfig | None = None,
    *,
    threads: int = 1,
) -> VerificationReport:
    """Fraction of replicate tables on which FCS beats CS in RMS phase error."""
    if replicates < 1:
        raise ValueError("need at least one replicate")
    errs = np.array(
        _map(lambda r: phase_errors(simulate(config, r), config.true_profile, family, optimizer), range(replicates), threads)
    )
    wins = errs[:, 1] < errs[:, 0]
    fraction = float(wins.mean())
    return VerificationReport(
        test="fcs_beats_cs",
        estimate=fraction,
        se=float(np.sqrt(fraction * (1 - fraction) / replicates)),
        bound=WIN_FRACTION,
        passed=bool(fraction >= WIN_FRACTION),
        replicates=replicates,
        seed=int(config.seed),
        details={
            "median_cs_rms": float(np.median(errs[:, 0])),
            "median_fcs_rms": float(np.median(errs[:, 1])),
        },
    )


DEFAULT_DOMAIN = (800.0, 820.0)
SUITE = ("unbiasedness", "variance", "scaling", "comparison")


def default_profiles():
    """Affine truth near the equator and a mismatched affine hypothesis."""
    truth = ProfileModel((np.pi / 2, 0.3), (np.pi, 1.5), DEFAULT_DOMAIN)
    hypothesis = ProfileModel((1.2, -0.2), (2.5, 1.0), DEFAULT_DOMAIN)
    return truth, hypothesis


def run_suite(names=SUITE, seed: int = 0, *, threads: int = 1, biased_loss: bool = False, quick: bool = False):
    """Run the named checks on the default profiles and return their reports."""
    names = list(names)
    if not names:
        raise ValueError("empty suite selection")
    unknown = set(names) - set(SUITE)
    if unknown:
        raise ValueError(f"unknown suite entries: {sorted(unknown)}")
    truth, hypothesis = default_profiles()
    xs = tuple(np.linspace(*DEFAULT_DOMAIN, 10))
    scale = 0.25 if quick else 1.0
    reports = []
    for name in names:
        if name == "unbiasedness":
            config = SimConfig(truth, xs, shots_mode="random_basis", shots=100, seed=seed)
            reports.append(
                verify_unbiasedness(config, hypothesis, max(100, int(2000 * scale)), threads=threads, normalize=not biased_loss)
            )
        elif name == "variance":
            reports.append(verify_variance_bound(truth, hypothesis, xs, int(200_000 * scale), seed))
        elif name == "scaling":
            reports.append(verify_sample_scaling(truth, hypothesis, xs, replicates=int(500 * scale), seed=seed, threads=threads))
        elif name == "comparison":
            config = SimConfig(truth, tuple(np.linspace(*DEFAULT_DOMAIN, 64)), shots=30, seed=seed)
            reports.append(compare_methods(config, max(20, int(200 * scale)), threads=threads))
    return reports


"""Synthetic count tables with Born-rule statistics.

Every (x index, replicate) pair gets its own generator derived from
``SeedSequence(seed, spawn_key=(replicate, x_index))``, so tables do not
depend on how generation is scheduled across threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import N_PROJECTORS, CountTable
from .errors import ConfigError, DataError
from .models import ProfileModel
from .qubit import BASES, BLOCH_AXES, Projector, PureHypothesis

SHOTS_MODES = ("fixed_per_setting", "random_basis", "poisson_frames", "exact")
SCHEDULES = ("cycled", "uniform_random")


def outcome_probability(h: PureHypothesis, p: Projector) -> float:
    """Born probability ``|<p|eta>|^2``."""
    return float(abs(np.vdot(Projector(p).ket, h.ket)) ** 2)


def outcome_probabilities(theta, phi) -> np.ndarray:
    """Born probabilities of all six projectors, trailing axis in projector order."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    bloch = np.stack(
        np.broadcast_arrays(np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)),
        axis=-1,
    )
    return np.clip(0.5 * (1.0 + bloch @ BLOCH_AXES.T), 0.0, 1.0)


@dataclass(frozen=True)
class SimConfig:
    """Acquisition settings.

    ``shots`` is ``m`` events per basis in ``fixed_per_setting`` mode, the
    total events per x in ``random_basis`` mode and unused otherwise.
    ``poisson_frames`` draws counts with mean ``2 * rate * P(p)`` per frame
    and setting, so ``rate`` is the per-setting mean for unpolarized light.
    ``exact`` writes ``exact_denominator * P(p) / 3`` with no randomness.
    """

    true_profile: ProfileModel
    xs: tuple
    shots_mode: str = "random_basis"
    shots: int = 30
    schedule: str = "uniform_random"
    rate: float = 0.1
    frames: int = 100
    exact_denominator: float = 3.0e6
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(float(x) for x in self.xs))
        if not self.xs:
            raise ConfigError("xs must be nonempty")
        if self.shots_mode not in SHOTS_MODES:
            raise ConfigError(f"shots_mode must be one of {SHOTS_MODES}, got {self.shots_mode!r}")
        if self.schedule not in SCHEDULES:
            raise ConfigError(f"schedule must be one of {SCHEDULES}, got {self.schedule!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return {
            "true_profile": self.true_profile.to_dict(),
            "xs": list(self.xs),
            "shots_mode": self.shots_mode,
            "shots": self.shots,
            "schedule": self.schedule,
            "rate": self.rate,
            "frames": self.frames,
            "exact_denominator": self.exact_denominator,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        data = dict(data)
        data["true_profile"] = ProfileModel.from_dict(data["true_profile"])
        return cls(**data)


def stream(seed: int, replicate: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(replicate), int(index))))


def _check_events(config: SimConfig) -> None:
    mode = config.shots_mode
    if mode in ("fixed_per_setting", "random_basis") and config.shots <= 0:
        raise DataError("zero shots requested; the table would be empty")
    if mode == "poisson_frames" and (config.frames <= 0 or config.rate <= 0):
        raise DataError("poisson_frames needs positive rate and frames")
    if mode == "exact" and config.exact_denominator <= 0:
        raise DataError("exact_denominator must be positive")


def _counts_at(config: SimConfig, probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    out = np.zeros(N_PROJECTORS)
    mode = config.shots_mode
    if mode == "exact":
        return config.exact_denominator * probs / 3.0
    if mode == "poisson_frames":
        # a sum of per-frame Poisson draws is Poisson with the summed mean
        return rng.poisson(config.frames * 2.0 * config.rate * probs).astype(float)
    if mode == "fixed_per_setting":
        per_basis = np.full(3, int(config.shots))
    elif config.schedule == "cycled":
        n = int(config.shots)
        per_basis = n // 3 + (np.arange(3) < n % 3)
    else:
        per_basis = rng.multinomial(int(config.shots), [1 / 3] * 3)
    for b, (p, q) in enumerate(BASES):
        k = rng.binomial(per_basis[b], probs[p])
        out[p] = k
        out[q] = per_basis[b] - k
    return out


def simulate(config: SimConfig, replicate: int = 0, threads: int = 1) -> CountTable:
    _check_events(config)
    xs = np.array(config.xs)
    theta, phi = config.true_profile.angles(xs)
    probs = outcome_probabilities(theta, phi)

    def one(i):
        return _counts_at(config, probs[i], stream(config.seed, replicate, i))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, range(xs.size)))
    else:
        rows = [one(i) for i in range(xs.size)]
    order = np.argsort(xs, kind="stable")
    return CountTable(xs[order], np.array(rows)[order])


def exact_table(true_profile: ProfileModel, xs, denominator: float = 3.0e6) -> CountTable:
    """Infinite-statistics table: Born proportions times a fixed denominator."""
    return simulate(SimConfig(true_profile, tuple(xs), shots_mode="exact", exact_denominator=denominator))


def sample_events(true_profile: ProfileModel, xs, n_events: int, rng: np.random.Generator):
    """Single events: x uniform over ``xs``, basis uniform, outcome by Born rule.

    Returns ``(x_index, projector_index)`` integer arrays.
    """
    xs = np.asarray(xs, dtype=float)
    theta, phi = true_profile.angles(xs)
    probs = outcome_probabilities(theta, phi)
    x_idx = rng.integers(0, xs.size, n_events)
    basis = rng.integers(0, 3, n_events)
    first = 2 * basis
    hit = rng.random(n_events) < probs[x_idx, first]
    return x_idx, np.where(hit, first, first + 1)


def bbo_profile(length_mm: float, x_domain, phase_slope_per_mm: float, phase_offset: float = np.pi) -> ProfileModel:
    """Equatorial profile with an affine birefringent phase.

    ``theta = pi/2`` everywhere and ``phi(x) = phase_offset +
    length_mm * phase_slope_per_mm * x``; with zero slope and the default
    offset this is the antidiagonal state.
    """
    if length_mm <= 0:
        raise ValueError("crystal length must be positive")
    return ProfileModel.from_raw_affine(np.pi / 2, 0.0, phase_offset, length_mm * phase_slope_per_mm, x_domain)

"""Polynomial angle profiles theta(x), phi(x) mapping x to pure states.

Coefficients are in the power basis of the rescaled variable
``t = 2 (x - lo) / (hi - lo) - 1`` so that ``t`` spans ``[-1, 1]`` over the
model's domain.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError
from .qubit import PureHypothesis

TWO_PI = 2 * np.pi
FAMILIES = ("constant", "affine", "polynomial")

_DOMAIN_RTOL = 1e-12


def parse_family(name: str) -> int:
    """Return the polynomial degree for ``constant``, ``affine`` or ``poly:K``."""
    name = name.strip().lower()
    if name == "constant":
        return 0
    if name == "affine":
        return 1
    m = re.fullmatch(r"(?:poly|polynomial):(\d+)", name)
    if m:
        return int(m.group(1))
    raise ValueError(f"unknown family {name!r}; expected constant, affine or poly:K")


def family_name(degree: int) -> str:
    return {0: "constant", 1: "affine"}.get(degree, "polynomial")


def canonicalize(theta, phi):
    """Fold theta into ``[0, pi]`` by reflection, shifting phi by pi where folded.

    The reflection ``theta -> -theta`` (mod 2 pi), ``phi -> phi + pi`` leaves
    the density operator unchanged.
    """
    theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    phi = np.asarray(phi, dtype=float)
    folded = theta > np.pi
    theta = np.where(folded, TWO_PI - theta, theta)
    phi = np.where(folded, phi + np.pi, phi)
    return theta, phi


@dataclass(frozen=True)
class ProfileModel:
    theta_params: tuple
    phi_params: tuple
    x_domain: tuple = (-1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "theta_params", tuple(float(c) for c in self.theta_params))
        object.__setattr__(self, "phi_params", tuple(float(c) for c in self.phi_params))
        lo, hi = (float(v) for v in self.x_domain)
        if not lo <= hi:
            raise ValueError(f"invalid x_domain {self.x_domain!r}")
        if not self.theta_params or not self.phi_params:
            raise ValueError("each angle needs at least one coefficient")
        object.__setattr__(self, "x_domain", (lo, hi))

    @classmethod
    def from_family(cls, family, theta_params, phi_params, x_domain=(-1.0, 1.0)):
        degree = parse_family(family) if isinstance(family, str) else int(family)
        if len(theta_params) != degree + 1 or len(phi_params) != degree + 1:
            raise ValueError(f"family of degree {degree} needs {degree + 1} coefficients per angle")
        return cls(tuple(theta_params), tuple(phi_params), x_domain)

    @classmethod
    def constant(cls, theta, phi, x_domain=(-1.0, 1.0)):
        return cls((theta,), (phi,), x_domain)

    @classmethod
    def from_raw_affine(cls, theta0, theta1, phi0, phi1, x_domain):
        """Affine model given as ``angle(x) = c0 + c1 * x`` in raw x units."""
        lo, hi = (float(v) for v in x_domain)
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        return cls(
            (theta0 + theta1 * mid, theta1 * half),
            (phi0 + phi1 * mid, phi1 * half),
            (lo, hi),
        )

    @property
    def theta_degree(self) -> int:
        return len(self.theta_params) - 1

    @property
    def phi_degree(self) -> int:
        return len(self.phi_params) - 1

    @property
    def degree(self) -> int:
        return max(self.theta_degree, self.phi_degree)

    @property
    def family(self) -> str:
        if self.theta_degree != self.phi_degree:
            return "polynomial"
        return family_name(self.degree)

    def parameter_count(self) -> int:
        return len(self.theta_params) + len(self.phi_params)

    def pack(self) -> np.ndarray:
        return np.array(self.theta_params + self.phi_params)

    def unpack(self, vector) -> "ProfileModel":
        """New model of the same shape with coefficients taken from ``vector``."""
        vector = np.asarray(vector, dtype=float).ravel()
        if vector.size != self.parameter_count():
            raise ValueError(f"expected {self.parameter_count()} parameters, got {vector.size}")
        k = len(self.theta_params)
        return ProfileModel(tuple(vector[:k]), tuple(vector[k:]), self.x_domain)

    def rescale(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.x_domain
        slack = _DOMAIN_RTOL * max(1.0, abs(lo), abs(hi))
        if np.any(x < lo - slack) or np.any(x > hi + slack):
            raise DomainError(f"x outside model domain [{lo}, {hi}]")
        if hi == lo:
            return np.zeros_like(x)
        return np.clip(2.0 * (x - lo) / (hi - lo) - 1.0, -1.0, 1.0)

    def raw_angles(self, x):
        """Uncanonicalized ``(theta(x), phi(x))``."""
        t = self.rescale(x)
        return P.polyval(t, self.theta_params), P.polyval(t, self.phi_params)

    def angles(self, x):
        """Canonical theta in ``[0, pi]`` and unwrapped phi at ``x``."""
        return canonicalize(*self.raw_angles(x))

    def evaluate(self, x: float) -> PureHypothesis:
        theta, phi = self.angles(x)
        return PureHypothesis(float(theta), float(phi))

    def densities(self, x) -> np.ndarray:
        """Stack of density operators, shape ``(len(x), 2, 2)``."""
        theta, phi = self.angles(np.atleast_1d(x))
        kets = np.stack([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], axis=-1)
        return kets[:, :, None] * kets[:, None, :].conj()

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "degree": self.degree,
            "theta_params": list(self.theta_params),
            "phi_params": list(self.phi_params),
            "x_domain": list(self.x_domain),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProfileModel":
        for key in ("theta_params", "phi_params", "x_domain"):
            if key not in data:
                raise ValueError(f"model is missing {key!r}")
        model = cls(tuple(data["theta_params"]), tuple(data["phi_params"]), tuple(data["x_domain"]))
        family = data.get("family")
        if family is not None and family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}")
        return model

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ProfileModel":
        return cls.from_dict(json.loads(text))


# ground-truth profiles share the model representation
TrueProfile = ProfileModel


def evaluate(model: ProfileModel, x: float) -> PureHypothesis:
    return model.evaluate(x)


def parameter_count(model: ProfileModel) -> int:
    return model.parameter_count()

"""Single-qubit linear algebra for polarization states.

Density operators are plain ``(2, 2)`` complex numpy arrays. The basis is
``|H> = (1, 0)``, ``|V> = (0, 1)``; Bloch components are ordered
``(x, y, z) = (D-A, R-L, H-V)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SQRT_HALF = 1.0 / np.sqrt(2.0)

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

HERMITIAN_ATOL = 1e-12


class Projector(enum.IntEnum):
    """The six Stokes projectors, in table column order."""

    H = 0
    V = 1
    D = 2
    A = 3
    R = 4
    L = 5

    @property
    def ket(self) -> np.ndarray:
        return _KETS[self]

    @property
    def partner(self) -> "Projector":
        """The orthogonal projector in the same basis."""
        return Projector(self ^ 1)

    @property
    def basis(self) -> int:
        """Basis index: 0 for {H,V}, 1 for {D,A}, 2 for {R,L}."""
        return int(self) // 2

    @property
    def bloch_axis(self) -> np.ndarray:
        """Unit Bloch vector of ``|p><p|``."""
        return BLOCH_AXES[self]

    @classmethod
    def parse(cls, label: str) -> "Projector":
        try:
            return cls[label.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown projector label {label!r}") from None


_KETS = {
    Projector.H: np.array([1, 0], dtype=complex),
    Projector.V: np.array([0, 1], dtype=complex),
    Projector.D: np.array([SQRT_HALF, SQRT_HALF], dtype=complex),
    Projector.A: np.array([SQRT_HALF, -SQRT_HALF], dtype=complex),
    Projector.R: np.array([SQRT_HALF, 1j * SQRT_HALF], dtype=complex),
    Projector.L: np.array([SQRT_HALF, -1j * SQRT_HALF], dtype=complex),
}

# rows follow Projector order
BLOCH_AXES = np.array(
    [
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
    ]
)

BASES = ((Projector.H, Projector.V), (Projector.D, Projector.A), (Projector.R, Projector.L))


def projector_matrix(p: Projector) -> np.ndarray:
    ket = Projector(p).ket
    return np.outer(ket, ket.conj())


@dataclass(frozen=True)
class PureHypothesis:
    """Bloch angles of ``cos(theta/2)|H> + exp(i phi) sin(theta/2)|V>``.

    ``phi`` is kept unwrapped; use :meth:`wrapped_phi` for comparisons.
    """

    theta: float
    phi: float

    @property
    def ket(self) -> np.ndarray:
        return np.array(
            [np.cos(self.theta / 2), np.exp(1j * self.phi) * np.sin(self.theta / 2)],
            dtype=complex,
        )

    @property
    def bloch(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.array([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])

    @property
    def wrapped_phi(self) -> float:
        return float(np.mod(self.phi, 2 * np.pi))


def density_from_hypothesis(h: PureHypothesis) -> np.ndarray:
    """Return ``|eta><eta|`` for a pure hypothesis."""
    if not (0.0 <= h.theta <= np.pi):
        raise DomainError(f"theta={h.theta!r} outside [0, pi]")
    ket = h.ket
    return np.outer(ket, ket.conj())


def density_from_bloch(vector) -> np.ndarray:
    """``(1 + r.sigma) / 2`` for a Bloch vector ``r``; no positivity check."""
    rx, ry, rz = vector
    return 0.5 * np.array([[1 + rz, rx - 1j * ry], [rx + 1j * ry, 1 - rz]], dtype=complex)


def bloch_vector(op: np.ndarray) -> np.ndarray:
    """Real Bloch components ``tr(sigma_i op)``."""
    op = np.asarray(op)
    return np.array([np.real(np.trace(s @ op)) for s in PAULIS])


def pure_fidelity(h1: PureHypothesis, h2: PureHypothesis) -> float:
    return float(abs(np.vdot(h1.ket, h2.ket)) ** 2)


def is_hermitian(op: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    op = np.asarray(op)
    return op.shape == (2, 2) and np.allclose(op, op.conj().T, rtol=0, atol=atol)


def is_physical(op: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    """Hermitian, unit trace and eigenvalues not below ``-atol``."""
    if not is_hermitian(op, atol):
        return False
    if abs(np.trace(op) - 1) > atol:
        return False
    return bool(eigvalsh2(op)[0] >= -atol)


def eigvalsh2(op: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a 2x2 Hermitian matrix in closed form."""
    a = np.real(op[0, 0])
    d = np.real(op[1, 1])
    mean = 0.5 * (a + d)
    radius = np.hypot(0.5 * (a - d), abs(op[0, 1]))
    return np.array([mean - radius, mean + radius])


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of ``a - b``."""
    lo, hi = eigvalsh2(np.asarray(a) - np.asarray(b))
    return float(0.5 * (abs(lo) + abs(hi)))


def helstrom_projector(a: np.ndarray, b: np.ndarray, *, with_flag: bool = False, tol: float = 1e-14):
    """Projector onto the positive eigenspace of ``a - b``.

    For equal-trace inputs ``tr[P (a - b)]`` equals :func:`trace_distance`.
    When ``a - b`` vanishes the zero operator is returned and, with
    ``with_flag=True``, a ``degenerate=True`` flag accompanies it.
    """
    diff = np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex)
    mean = 0.5 * np.real(diff[0, 0] + diff[1, 1])
    radius = np.hypot(0.5 * np.real(diff[0, 0] - diff[1, 1]), abs(diff[0, 1]))
    lo, hi = mean - radius, mean + radius
    degenerate = False
    if radius <= tol:
        # scalar multiple of the identity
        proj = IDENTITY.copy() if mean > tol else np.zeros((2, 2), dtype=complex)
        degenerate = not mean > tol
    elif lo > tol:
        proj = IDENTITY.copy()
    elif hi > tol:
        # spectral projector of the top eigenvalue
        proj = 0.5 * (IDENTITY + (diff - mean * IDENTITY) / radius)
    else:
        proj = np.zeros((2, 2), dtype=complex)
    if with_flag:
        return proj, degenerate
    return proj

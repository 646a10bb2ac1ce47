"""
Parameter types and assembly of the spin-boson Hamiltonian

    H = eps_plus - sigma_x/2 + (P^2 + r^2 Q^2)/2 + (sqrt(p/2) r Q + eps_minus) sigma_z

in the product basis |z, k> of spin states and number states of a unit-mass
oscillator with frequency r.  Basis index i = 2k + z with z = 0 (up), 1 (down).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceError

UP = 0
DOWN = 1

# dense eigendecomposition beyond this is out of scope
MAX_DIM = 20000


def spin_sign(z: int) -> int:
    """Eigenvalue of sigma_z for spin index ``z`` (+1 up, -1 down)."""
    if z == UP:
        return 1
    if z == DOWN:
        return -1
    raise IndexError(f"spin index must be 0 (up) or 1 (down), got {z!r}")


@dataclass(frozen=True)
class DimerParams:
    """Physical dimer parameters: monomer energies, vibronic coupling
    constant, vibrational frequency and transfer magnitude V (> 0)."""

    eps1: float
    eps2: float
    gamma: float
    omega: float
    v: float


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless spin-boson parameters.

    Attributes
    ----------
    p : float
        Coupling strength, ``p >= 0``.
    r : float
        Adiabatic parameter (oscillator frequency in units of 2V), ``r > 0``.
    eps_plus : float
        Energy-center shift.
    eps_minus : float
        Site-energy asymmetry.
    """

    p: float
    r: float
    eps_plus: float = 0.0
    eps_minus: float = 0.0

    def __post_init__(self):
        for name in ("p", "r", "eps_plus", "eps_minus"):
            val = getattr(self, name)
            if not math.isfinite(val):
                raise DomainError(f"{name} must be finite, got {val!r}")
        if self.p < 0:
            raise DomainError(f"p must be >= 0, got {self.p}")
        if self.r <= 0:
            raise DomainError(f"r must be > 0, got {self.r}")

    @property
    def vibronic(self) -> float:
        """Ladder-operator prefactor sqrt(p r)/2 of the linear coupling."""
        return math.sqrt(self.p * self.r) / 2.0


@dataclass(frozen=True)
class BasisSpec:
    """Oscillator truncation ``n_osc`` and number of retained eigenstates."""

    n_osc: int = 2000
    keep: int = 1100

    def __post_init__(self):
        if int(self.n_osc) != self.n_osc or self.n_osc < 1:
            raise DomainError(f"n_osc must be a positive integer, got {self.n_osc!r}")
        if int(self.keep) != self.keep or not 0 < self.keep <= 2 * self.n_osc:
            raise DomainError(
                f"keep must satisfy 0 < keep <= 2*n_osc = {2 * self.n_osc}, got {self.keep!r}"
            )

    @property
    def dim(self) -> int:
        return 2 * self.n_osc


# parameter sets studied in the absorption analysis
SET_A = ModelParams(p=4.0, r=0.1, eps_plus=0.0, eps_minus=5.0)
SET_B = ModelParams(p=20.0, r=0.1, eps_plus=0.0, eps_minus=10.0)


def reduce_dimer_params(d: DimerParams) -> ModelParams:
    """Map physical dimer parameters to the dimensionless spin-boson set."""
    if not d.omega > 0:
        raise DomainError(f"omega must be > 0, got {d.omega}")
    if not d.v > 0:
        raise DomainError(f"v must be > 0, got {d.v}")
    return ModelParams(
        p=d.gamma ** 2 / (2.0 * d.v * d.omega ** 2),
        r=d.omega / (2.0 * d.v),
        eps_plus=(d.eps1 + d.eps2) / (4.0 * d.v),
        eps_minus=(d.eps1 - d.eps2) / (4.0 * d.v),
    )


def hamiltonian_element(m: ModelParams, z: int, k: int, z2: int, k2: int,
                        n_osc: int | None = None) -> float:
    """Matrix element <z,k|H|z2,k2> in closed form.

    ``n_osc`` optionally bounds the oscillator indices.
    """
    s, s2 = spin_sign(z), spin_sign(z2)
    for idx in (k, k2):
        if idx < 0 or (n_osc is not None and idx >= n_osc):
            raise IndexError(f"oscillator index {idx} out of range")
    if k == k2:
        if z == z2:
            return m.eps_plus + m.r * (k + 0.5) + s * m.eps_minus
        return -0.5
    if abs(k - k2) == 1 and z == z2:
        return s * m.vibronic * math.sqrt(max(k, k2))
    return 0.0


@dataclass(frozen=True, eq=False)
class SymmetricBandMatrix:
    """Real symmetric matrix with half-bandwidth 2 in lower band storage.

    ``bands[d, i]`` holds the element (i + d, i); entries past the end of a
    diagonal are zero.  Symmetry is exact because only one triangle is stored.
    """

    bands: np.ndarray
    params: ModelParams
    n_osc: int

    @property
    def dim(self) -> int:
        return self.bands.shape[1]

    def entry(self, i: int, j: int) -> float:
        if not (0 <= i < self.dim and 0 <= j < self.dim):
            raise IndexError(f"({i}, {j}) outside a {self.dim}x{self.dim} matrix")
        lo, hi = max(i, j), min(i, j)
        d = lo - hi
        if d >= self.bands.shape[0]:
            return 0.0
        return float(self.bands[d, hi])

    def toarray(self) -> np.ndarray:
        n = self.dim
        try:
            a = np.zeros((n, n))
        except MemoryError as exc:
            raise ResourceError(f"cannot allocate dense {n}x{n} matrix") from exc
        for d in range(self.bands.shape[0]):
            diag = self.bands[d, : n - d]
            idx = np.arange(n - d)
            a[idx + d, idx] = diag
            a[idx, idx + d] = diag
        return a

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """H @ v for a vector or a (dim, k) block, without densifying."""
        v = np.asarray(v)
        out = self.bands[0].reshape((-1,) + (1,) * (v.ndim - 1)) * v
        n = self.dim
        for d in range(1, self.bands.shape[0]):
            b = self.bands[d, : n - d].reshape((-1,) + (1,) * (v.ndim - 1))
            out[d:] += b * v[: n - d]
            out[: n - d] += b * v[d:]
        return out


def build_hamiltonian(m: ModelParams, b: BasisSpec) -> SymmetricBandMatrix:
    """Assemble H for truncation ``b.n_osc`` as a banded symmetric matrix."""
    n = b.n_osc
    dim = 2 * n
    if dim > MAX_DIM:
        raise ResourceError(f"matrix dimension {dim} exceeds the supported maximum {MAX_DIM}")
    try:
        bands = np.zeros((3, dim))
    except MemoryError as exc:
        raise ResourceError(f"cannot allocate band storage for dimension {dim}") from exc

    k = np.arange(n, dtype=float)
    harmonic = m.eps_plus + m.r * (k + 0.5)
    bands[0, 0::2] = harmonic + m.eps_minus
    bands[0, 1::2] = harmonic - m.eps_minus
    # (2k+1, 2k): spin flip within one oscillator level
    bands[1, 0::2] = -0.5
    # (2k+2+z, 2k+z): vibronic coupling k <-> k+1, sign follows sigma_z
    g = m.vibronic * np.sqrt(k[1:])
    bands[2, 0 : dim - 2 : 2] = g
    bands[2, 1 : dim - 2 : 2] = -g
    bands.setflags(write=False)
    return SymmetricBandMatrix(bands=bands, params=m, n_osc=n)


def parity_operator(n_osc: int) -> np.ndarray:
    """Dense sigma_x (x) (-1)^k; commutes with H when eps_minus = 0."""
    sign = (-1.0) ** np.arange(n_osc)
    return np.kron(np.diag(sign), np.array([[0.0, 1.0], [1.0, 0.0]]))

"""
Adiabatic reference systems: the Q-dependent eigenvalues and eigenstates of
the spin part of the Hamiltonian, plus the classical orbits of
H(Q, P) = P^2/2 + U(Q) on either potential branch.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DomainError, EmptyOrbit
from .model import ModelParams
from .spin import SpinProjection

SCAN_POINTS = 4096
CONTOUR_TOL = 1e-9


class Branch(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"

    @property
    def sign(self) -> int:
        return 1 if self is Branch.UPPER else -1

    @classmethod
    def parse(cls, value) -> "Branch":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"+": cls.UPPER, "upper": cls.UPPER, "-": cls.LOWER, "lower": cls.LOWER}
        if key not in aliases:
            raise ValueError(f"unknown branch {value!r}")
        return aliases[key]


def _mixing_argument(m: ModelParams, q):
    """2 eps_minus + sqrt(2p) r Q."""
    return 2.0 * m.eps_minus + math.sqrt(2.0 * m.p) * m.r * np.asarray(q, dtype=float)


def _half_gap(m: ModelParams, q):
    x = m.eps_minus + math.sqrt(m.p / 2.0) * m.r * np.asarray(q, dtype=float)
    return np.sqrt(0.25 + x * x)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def adiabatic_potentials(m: ModelParams, q):
    """(U_minus(Q), U_plus(Q)); accepts scalars or arrays."""
    base = 0.5 * m.r ** 2 * np.asarray(q, dtype=float) ** 2
    gap = _half_gap(m, q)
    return _scalar(base - gap), _scalar(base + gap)


def potential(m: ModelParams, q, branch: Branch):
    u_minus, u_plus = adiabatic_potentials(m, q)
    return u_plus if Branch.parse(branch) is Branch.UPPER else u_minus


def potential_derivative(m: ModelParams, q, branch: Branch):
    """dU/dQ on the given branch."""
    q = np.asarray(q, dtype=float)
    a = math.sqrt(m.p / 2.0) * m.r
    x = m.eps_minus + a * q
    slope = m.r ** 2 * q + Branch.parse(branch).sign * a * x / np.sqrt(0.25 + x * x)
    return _scalar(slope)


def adiabatic_mixing(m: ModelParams, q):
    """Mixing coefficient A(Q), strictly inside (-1, 1)."""
    g = _mixing_argument(m, q)
    return _scalar(g / np.sqrt(1.0 + g * g))


def adiabatic_bloch(m: ModelParams, q, branch: Branch):
    """<sigma_x> of the adiabatic state: negative on the upper branch."""
    g = _mixing_argument(m, q)
    return _scalar(-Branch.parse(branch).sign / np.sqrt(1.0 + g * g))


def adiabatic_states(m: ModelParams, q: float) -> tuple[SpinProjection, SpinProjection]:
    """Adiabatic spin eigenvectors (upper, lower) at coordinate ``q``."""
    a = float(adiabatic_mixing(m, q))
    s = 1.0 / math.sqrt(2.0)
    upper = SpinProjection(s * math.sqrt(1.0 + a), -s * math.sqrt(1.0 - a))
    lower = SpinProjection(s * math.sqrt(1.0 - a), s * math.sqrt(1.0 + a))
    return upper, lower


def franck_condon_energies(m: ModelParams) -> tuple[float, float]:
    """Vertical transition energies (U_minus(0), U_plus(0))."""
    u_minus, u_plus = adiabatic_potentials(m, 0.0)
    return float(u_minus), float(u_plus)


def franck_condon_width(m: ModelParams, branch: Branch) -> float:
    """Energy spread of the vertical transition from the oscillator ground state.

    Linearizes U at Q = 0 and uses <Q^2> = 1/(2r) of the undisplaced ground state.
    """
    return abs(float(potential_derivative(m, 0.0, branch))) / math.sqrt(2.0 * m.r)


def classical_extent(m: ModelParams, energy: float) -> float:
    """Bound on |Q| outside which both potentials exceed ``energy``."""
    a = math.sqrt(m.p / 2.0) * m.r
    b = 0.5 + abs(m.eps_minus)
    disc = a * a + 2.0 * m.r ** 2 * max(energy + b, 0.0)
    return (a + math.sqrt(disc)) / m.r ** 2


def potential_minima(m: ModelParams, branch: Branch, q_range=None) -> list[tuple[float, float]]:
    """Local minima (Q, U) of one branch, ascending in Q.

    Minima are bracketed by sign changes of dU/dQ on a uniform scan grid and
    then refined.  The lower branch can be double-welled.
    """
    branch = Branch.parse(branch)
    if q_range is None:
        # U_min is below U(0), so every minimum lies inside the extent at U(0)
        ext = 1.01 * classical_extent(m, float(potential(m, 0.0, branch))) + 1.0
        q_range = (-ext, ext)
    q = np.linspace(q_range[0], q_range[1], SCAN_POINTS)
    d = potential_derivative(m, q, branch)
    out = []
    for i in np.nonzero((d[:-1] < 0) & (d[1:] >= 0))[0]:
        lo, hi = q[i], q[i + 1]
        if d[i + 1] == 0:
            qm = hi
        else:
            qm = brentq(lambda x: potential_derivative(m, x, branch), lo, hi, xtol=1e-14)
        out.append((float(qm), float(potential(m, qm, branch))))
    if not out:
        # monotone scan: fall back to a bounded search over the range
        res = minimize_scalar(lambda x: potential(m, x, branch), bounds=q_range,
                              method="bounded", options={"xatol": 1e-12})
        out.append((float(res.x), float(res.fun)))
    return out


def branch_minimum(m: ModelParams, branch: Branch) -> tuple[float, float]:
    """Global minimum (Q, U) of a branch."""
    return min(potential_minima(m, branch), key=lambda t: t[1])


@dataclass(frozen=True, eq=False)
class Orbit:
    """Energy contour of one adiabatic Hamiltonian.

    ``components`` holds one closed (n, 2) polyline of (Q, P) per connected
    piece of the classically allowed region; each is traversed
    counter-clockwise and its last point repeats the first.
    """

    branch: Branch
    energy: float
    components: tuple

    @property
    def points(self) -> np.ndarray:
        return np.vstack(self.components)

    @property
    def n_components(self) -> int:
        return len(self.components)

    def areas(self) -> list[float]:
        out = []
        for c in self.components:
            x, y = c[:, 0], c[:, 1]
            out.append(0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1])))
        return out

    @property
    def area(self) -> float:
        return sum(self.areas())

    def residuals(self, m: ModelParams) -> np.ndarray:
        pts = self.points
        return np.abs(0.5 * pts[:, 1] ** 2 + potential(m, pts[:, 0], self.branch) - self.energy)


def classical_orbit(m: ModelParams, branch: Branch, energy: float, n_points: int = 400) -> Orbit:
    """Sample the contour P^2/2 + U(Q) = E on one branch.

    Points are uniform in Q between bisected turning points, with mirrored
    +P and -P halves.  Raises :class:`EmptyOrbit` below the branch minimum.
    """
    branch = Branch.parse(branch)
    if n_points < 2:
        raise DomainError("n_points must be >= 2")
    energy = float(energy)
    minima = potential_minima(m, branch)
    u_min = min(u for _, u in minima)
    if energy < u_min:
        raise EmptyOrbit(f"energy {energy} lies below the {branch.value} branch minimum {u_min}")

    ext = 1.01 * classical_extent(m, energy) + 1.0
    grid = np.union1d(np.linspace(-ext, ext, SCAN_POINTS), [q for q, _ in minima])
    f = energy - potential(m, grid, branch)
    inside = f >= 0

    def excess(x):
        return energy - potential(m, x, branch)

    components = []
    edges = np.diff(inside.astype(np.int8))
    starts = list(np.nonzero(edges == 1)[0] + 1)
    stops = list(np.nonzero(edges == -1)[0])
    for i0, i1 in zip(starts, stops):
        left = grid[i0] if f[i0] == 0 else brentq(excess, grid[i0 - 1], grid[i0], xtol=1e-13)
        right = grid[i1] if f[i1] == 0 else brentq(excess, grid[i1], grid[i1 + 1], xtol=1e-13)
        q = np.linspace(left, right, n_points)
        pm = np.sqrt(2.0 * np.clip(excess(q), 0.0, None))
        pm[0] = pm[-1] = 0.0
        lower = np.column_stack([q, -pm])
        upper = np.column_stack([q[::-1], pm[::-1]])[1:]
        components.append(np.vstack([lower, upper]))
    if not components:
        raise EmptyOrbit(f"no classically allowed region at energy {energy}")
    return Orbit(branch=branch, energy=energy, components=tuple(components))


def orbits_at(m: ModelParams, energy: float, n_points: int = 400) -> list[Orbit]:
    """Orbits on whichever branches are energetically accessible."""
    out = []
    for b in (Branch.LOWER, Branch.UPPER):
        try:
            out.append(classical_orbit(m, b, energy, n_points))
        except EmptyOrbit:
            pass
    return out

"""
Eigenstate diagnostics: Bloch projections, Husimi distributions at a fixed
spin direction, and the parity expectation of the symmetric model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import distance_transform_edt
from scipy.special import gammaln

from .errors import DomainError
from .spectrum import EigenSystem
from .spin import SPIN_SYMMETRIC, SpinProjection

__all__ = [
    "SpinProjection", "PhasePoint", "HusimiGrid",
    "bloch_projection", "bloch_projections", "bloch_scan",
    "coherent_alpha", "coherent_overlaps", "husimi_value", "husimi_grid", "husimi_grids",
    "parity_expectation", "parity_expectations", "tube_mask", "tube_mass_fraction",
]

# points per block when building coherent-state overlap matrices
_CHUNK = 2048


@dataclass(frozen=True)
class PhasePoint:
    q: float
    p_mom: float


def coherent_alpha(r: float, q, p_mom):
    """alpha(Q, P) = sqrt(r/2) Q + i P / sqrt(2r)."""
    return math.sqrt(r / 2.0) * np.asarray(q, dtype=float) + 1j * np.asarray(p_mom, dtype=float) / math.sqrt(2.0 * r)


def coherent_overlaps(alpha, n_osc: int) -> np.ndarray:
    """<m|alpha> for m < n_osc, shape (len(alpha), n_osc).

    Each term alpha^m / sqrt(m!) exp(-|alpha|^2/2) is formed from its log
    magnitude and phase; direct powers and factorials overflow for
    |alpha|^2 in the hundreds.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    m = np.arange(n_osc, dtype=float)
    mag = np.abs(alpha)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        logmag = np.log(mag)
        # m = 0 contributes m * log|alpha| = 0 even at alpha = 0
        expo = np.where(m[None, :] == 0, 0.0, m[None, :] * logmag)
    expo = expo - 0.5 * gammaln(m + 1.0)[None, :] - 0.5 * mag ** 2
    phase = m[None, :] * np.angle(alpha)[:, None]
    return np.exp(expo + 1j * phase)


def _spin_amplitudes(es: EigenSystem, lams, s: SpinProjection) -> np.ndarray:
    """sum_z c_{z,m} s_z for the selected states, shape (n_osc, len(lams))."""
    idx = [es.check_index(l) for l in lams]
    return (es.up[idx] * s.c_up + es.down[idx] * s.c_down).T


def bloch_projections(es: EigenSystem) -> np.ndarray:
    """x_lambda = <sigma_x> for every kept state."""
    return 2.0 * np.einsum("lm,lm->l", es.up, es.down)


def bloch_projection(es: EigenSystem, lam: int) -> float:
    lam = es.check_index(lam)
    return float(2.0 * np.dot(es.up[lam], es.down[lam]))


def bloch_scan(es: EigenSystem) -> list[tuple[float, float]]:
    """(E_lambda, x_lambda) for all kept states, energy-ascending."""
    return list(zip(es.energies.tolist(), bloch_projections(es).tolist()))


def parity_expectations(es: EigenSystem) -> np.ndarray:
    """<sigma_x (x) (-1)^m> for every kept state."""
    sign = (-1.0) ** np.arange(es.n_osc)
    return 2.0 * np.einsum("lm,lm,m->l", es.up, es.down, sign)


def parity_expectation(es: EigenSystem, lam: int) -> float:
    lam = es.check_index(lam)
    sign = (-1.0) ** np.arange(es.n_osc)
    return float(2.0 * np.sum(sign * es.up[lam] * es.down[lam]))


def husimi_value(es: EigenSystem, lam: int, pt: PhasePoint, s: SpinProjection) -> float:
    """|<lambda | alpha(Q, P), s>|^2 for a single phase-space point."""
    amps = _spin_amplitudes(es, [lam], s)[:, 0]
    ov = coherent_overlaps(coherent_alpha(es.params.r, pt.q, pt.p_mom), es.n_osc)[0]
    return float(abs(np.dot(ov, amps)) ** 2)


@dataclass(frozen=True, eq=False)
class HusimiGrid:
    """Husimi values on a uniform (Q, P) grid.

    ``values[i, j]`` belongs to ``q[i]``, ``p[j]``; grid points include the
    window edges.
    """

    window: tuple[float, float, float, float]
    nq: int
    np: int
    values: np.ndarray
    lam: int
    spin: SpinProjection

    @property
    def q(self) -> np.ndarray:
        return np.linspace(self.window[0], self.window[1], self.nq)

    @property
    def p(self) -> np.ndarray:
        return np.linspace(self.window[2], self.window[3], self.np)

    @property
    def dq(self) -> float:
        return (self.window[1] - self.window[0]) / (self.nq - 1)

    @property
    def dp(self) -> float:
        return (self.window[3] - self.window[2]) / (self.np - 1)

    def phase_space_integral(self) -> float:
        """(1/2pi) sum h dQ dP over the grid."""
        return float(self.values.sum() * self.dq * self.dp / (2.0 * math.pi))


def _check_grid(window, nq, np_):
    q0, q1, p0, p1 = (float(w) for w in window)
    if nq < 2 or np_ < 2:
        raise DomainError("grid needs at least 2 points per axis")
    if not (q1 > q0 and p1 > p0):
        raise DomainError(f"degenerate window {window}")
    return q0, q1, p0, p1


def husimi_grids(es: EigenSystem, lams, window, nq: int = 480, np_: int = 200,
                 s: SpinProjection = SPIN_SYMMETRIC) -> list[HusimiGrid]:
    """Husimi grids for several states sharing one window.

    The coherent-state overlap block is built once per chunk of grid points
    and contracted against every requested state.
    """
    lams = [es.check_index(l) for l in lams]
    q0, q1, p0, p1 = _check_grid(window, nq, np_)
    qq, pp = np.meshgrid(np.linspace(q0, q1, nq), np.linspace(p0, p1, np_), indexing="ij")
    alpha = coherent_alpha(es.params.r, qq.ravel(), pp.ravel())
    amps = _spin_amplitudes(es, lams, s).astype(complex)
    out = np.empty((alpha.size, len(lams)))
    for start in range(0, alpha.size, _CHUNK):
        block = coherent_overlaps(alpha[start:start + _CHUNK], es.n_osc)
        out[start:start + _CHUNK] = np.abs(block @ amps) ** 2
    # roundoff can push a pure-state overlap a hair past 1
    np.clip(out, 0.0, 1.0, out=out)
    return [
        HusimiGrid(window=(q0, q1, p0, p1), nq=nq, np=np_,
                   values=out[:, k].reshape(nq, np_), lam=lam, spin=s)
        for k, lam in enumerate(lams)
    ]


def husimi_grid(es: EigenSystem, lam: int, window, nq: int = 480, np_: int = 200,
                s: SpinProjection = SPIN_SYMMETRIC) -> HusimiGrid:
    return husimi_grids(es, [lam], window, nq, np_, s)[0]


def tube_mask(grid: HusimiGrid, polylines, halfwidth: float = 3.0) -> np.ndarray:
    """Cells within ``halfwidth`` grid cells of any of the given polylines.

    Polylines are (n, 2) arrays of (Q, P); they are resampled so consecutive
    points are under half a cell apart before rasterizing.
    """
    hit = np.zeros((grid.nq, grid.np), dtype=bool)
    for line in polylines:
        line = np.asarray(line, dtype=float)
        u = (line[:, 0] - grid.window[0]) / grid.dq
        v = (line[:, 1] - grid.window[2]) / grid.dp
        seg = np.hypot(np.diff(u), np.diff(v))
        t = np.concatenate([[0.0], np.cumsum(seg)])
        n = max(int(math.ceil(t[-1] / 0.25)) + 1, len(t))
        ts = np.linspace(0.0, t[-1], n)
        ui = np.rint(np.interp(ts, t, u)).astype(int)
        vi = np.rint(np.interp(ts, t, v)).astype(int)
        ok = (ui >= 0) & (ui < grid.nq) & (vi >= 0) & (vi < grid.np)
        hit[ui[ok], vi[ok]] = True
    if not hit.any():
        return hit
    return distance_transform_edt(~hit) <= halfwidth


def tube_mass_fraction(grid: HusimiGrid, polylines, halfwidth: float = 3.0) -> float:
    """Fraction of the grid's Husimi mass lying inside the orbit tube."""
    total = grid.values.sum()
    if total <= 0:
        return 0.0
    return float(grid.values[tube_mask(grid, polylines, halfwidth)].sum() / total)

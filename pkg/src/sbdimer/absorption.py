"""
Optical absorption from the excitonic vacuum with the oscillator in |m=0>.

The transition element into eigenstate lambda is mu1 c_{up,0} + mu2 c_{down,0};
dividing its square by mu1^2 + mu2^2 gives the dimensionless strength, which
equals the Husimi value of the final state at Q = P = 0 for spin s_mu.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .adiabatic import Branch, franck_condon_energies, franck_condon_width
from .errors import DomainError, ProvenanceError
from .model import ModelParams
from .spectrum import EigenSystem
from .spin import SpinProjection

UNDEFINED_RATIO_TOL = 1e-14


@dataclass(frozen=True)
class OpticalParams:
    """Transition dipoles of the two monomers projected on the field."""

    mu1: float
    mu2: float

    def __post_init__(self):
        if not (math.isfinite(self.mu1) and math.isfinite(self.mu2)):
            raise DomainError("transition dipoles must be finite")
        if self.mu1 == 0 and self.mu2 == 0:
            raise DomainError("mu1 and mu2 cannot both vanish")

    @property
    def norm2(self) -> float:
        return self.mu1 ** 2 + self.mu2 ** 2

    @property
    def tag(self) -> str:
        def fmt(x):
            return f"{x:g}".replace("-", "m").replace(".", "p").replace("+", "")
        return f"{fmt(self.mu1)}_{fmt(self.mu2)}"


def spin_direction(o: OpticalParams) -> SpinProjection:
    """(cos a, sin a) with tan a = mu2 / mu1."""
    n = math.sqrt(o.norm2)
    return SpinProjection(o.mu1 / n, o.mu2 / n)


def transition_elements(es: EigenSystem, o: OpticalParams) -> np.ndarray:
    return o.mu1 * es.up[:, 0] + o.mu2 * es.down[:, 0]


def transition_element(es: EigenSystem, lam: int, o: OpticalParams) -> float:
    lam = es.check_index(lam)
    return float(o.mu1 * es.up[lam, 0] + o.mu2 * es.down[lam, 0])


def absorption_strengths(es: EigenSystem, o: OpticalParams) -> np.ndarray:
    """Q_lambda for all kept states."""
    s = spin_direction(o)
    return (s.c_up * es.up[:, 0] + s.c_down * es.down[:, 0]) ** 2


def absorption_strength(es: EigenSystem, lam: int, o: OpticalParams) -> float:
    lam = es.check_index(lam)
    s = spin_direction(o)
    return float((s.c_up * es.up[lam, 0] + s.c_down * es.down[lam, 0]) ** 2)


@dataclass(frozen=True, eq=False)
class StickSpectrum:
    """Absorption lines (lambda, E, Q) inside an energy window."""

    lams: np.ndarray
    energies: np.ndarray
    strengths: np.ndarray
    window: tuple[float, float]
    optical: OpticalParams
    source: str

    @property
    def lines(self) -> list[tuple[float, float]]:
        return list(zip(self.energies.tolist(), self.strengths.tolist()))

    def __len__(self):
        return len(self.lams)

    @property
    def total(self) -> float:
        return float(self.strengths.sum())

    @property
    def mean_energy(self) -> float:
        """Strength-weighted mean energy (nan for an empty or dark band)."""
        t = self.strengths.sum()
        return float(np.dot(self.strengths, self.energies) / t) if t > 0 else float("nan")


def stick_spectrum(es: EigenSystem, o: OpticalParams, window) -> StickSpectrum:
    e_min, e_max = float(window[0]), float(window[1])
    sel = np.nonzero((es.energies >= e_min) & (es.energies <= e_max))[0]
    q = absorption_strengths(es, o)[sel]
    return StickSpectrum(lams=sel, energies=es.energies[sel].copy(), strengths=q,
                         window=(e_min, e_max), optical=o, source=es.fingerprint)


@dataclass(frozen=True, eq=False)
class RatioCurve:
    """Spin ratios c_{down,0}/c_{up,0}; ``defined`` is False where c_{up,0} ~ 0.

    ``down0`` keeps c_{down,0} so lines without a ratio can still be rebuilt.
    """

    lams: np.ndarray
    energies: np.ndarray
    ratios: np.ndarray
    defined: np.ndarray
    down0: np.ndarray
    source: str

    @property
    def points(self) -> list[tuple[float, float]]:
        d = self.defined
        return list(zip(self.energies[d].tolist(), self.ratios[d].tolist()))


def spin_ratio(es: EigenSystem, lam: int):
    """c_{down,0}/c_{up,0}, or None when |c_{up,0}| < 1e-14."""
    lam = es.check_index(lam)
    up = es.up[lam, 0]
    if abs(up) < UNDEFINED_RATIO_TOL:
        return None
    return float(es.down[lam, 0] / up)


def ratio_curve(es: EigenSystem, window=None) -> RatioCurve:
    if window is None:
        sel = np.arange(es.keep)
    else:
        sel = np.nonzero((es.energies >= window[0]) & (es.energies <= window[1]))[0]
    up = es.up[sel, 0]
    down = es.down[sel, 0]
    defined = np.abs(up) >= UNDEFINED_RATIO_TOL
    ratios = np.full(sel.shape, np.nan)
    ratios[defined] = down[defined] / up[defined]
    return RatioCurve(lams=sel, energies=es.energies[sel].copy(), ratios=ratios,
                      defined=defined, down0=down.copy(), source=es.fingerprint)


def interpolate_band(base: StickSpectrum, ratios: RatioCurve, o: OpticalParams) -> StickSpectrum:
    """Rebuild a band for dipoles ``o`` from the (mu1, 0) band and spin ratios.

    Q(o) = (mu1 + mu2 r)^2 / (mu1^2 + mu2^2) * Q_plus, which is exact.
    Lines whose ratio is undefined use c_{down,0} directly.
    """
    if base.source != ratios.source:
        raise ProvenanceError("base spectrum and ratio curve come from different eigensystems")
    if base.optical.mu2 != 0:
        raise DomainError("base spectrum must be computed with mu2 = 0")
    pos = {int(l): i for i, l in enumerate(ratios.lams)}
    missing = [int(l) for l in base.lams if int(l) not in pos]
    if missing:
        raise ProvenanceError(f"ratio curve lacks states {missing[:5]}")
    idx = np.array([pos[int(l)] for l in base.lams], dtype=int)
    r = ratios.ratios[idx]
    ok = ratios.defined[idx]
    q = np.empty_like(base.strengths)
    q[ok] = (o.mu1 + o.mu2 * r[ok]) ** 2 / o.norm2 * base.strengths[ok]
    # c_up,0 ~ 0 here, so only the down amplitude survives
    q[~ok] = o.mu2 ** 2 * ratios.down0[idx][~ok] ** 2 / o.norm2
    return StickSpectrum(lams=base.lams.copy(), energies=base.energies.copy(), strengths=q,
                         window=base.window, optical=o, source=base.source)


def band_windows(m: ModelParams, halfwidth=None) -> dict[str, tuple[float, float]]:
    """Energy windows of the lower and upper absorption bands.

    Centered on the Franck-Condon energies.  By default each half-width is
    the larger of 5 oscillator quanta and 4 Franck-Condon widths.
    """
    fc = dict(zip(("lower", "upper"), franck_condon_energies(m)))
    out = {}
    for name, branch in (("lower", Branch.LOWER), ("upper", Branch.UPPER)):
        if halfwidth is None:
            hw = max(5.0 * m.r, 4.0 * franck_condon_width(m, branch))
        else:
            hw = float(halfwidth)
        out[name] = (fc[name] - hw, fc[name] + hw)
    return out


def broaden(spec: StickSpectrum, grid, width: float) -> np.ndarray:
    """Sum of unit-area Gaussians of std ``width`` centered on each line."""
    if width <= 0:
        raise DomainError("broadening width must be positive")
    grid = np.asarray(grid, dtype=float)
    z = (grid[:, None] - spec.energies[None, :]) / width
    return np.exp(-0.5 * z * z) @ spec.strengths / (width * math.sqrt(2.0 * math.pi))

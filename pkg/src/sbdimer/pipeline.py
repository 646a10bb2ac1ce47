"""Pipeline orchestration: build, diagonalize, analyze and emit files."""
from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import outputs
from .absorption import (OpticalParams, absorption_strengths, band_windows,
                         ratio_curve, stick_spectrum)
from .adiabatic import (Branch, adiabatic_potentials, franck_condon_energies,
                        franck_condon_width, orbits_at, potential_minima)
from .config import RunConfig
from .errors import ConfigError, DomainError, PipelineError
from .phase_analysis import bloch_projections, husimi_grids, parity_expectations, tube_mass_fraction
from .spectrum import EigenSystem, convergence_check, load_eigensystem, save_eigensystem, solve

log = logging.getLogger(__name__)

STAGES = ("spectrum", "bloch", "adiabatic", "husimi", "absorb", "ratio")


def cache_key(cfg: RunConfig) -> str:
    m, b = cfg.model, cfg.basis
    text = (f"p={float(m.p)!r} r={float(m.r)!r} eps_plus={float(m.eps_plus)!r} "
            f"eps_minus={float(m.eps_minus)!r} n_osc={b.n_osc} keep={b.keep}")
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def get_eigensystem(cfg: RunConfig, cache_dir=None, memo: dict | None = None) -> EigenSystem:
    """Diagonalize, reusing an in-memory memo or an on-disk cache when given."""
    key = cache_key(cfg)
    if memo is not None and key in memo:
        return memo[key]
    es = None
    if cache_dir is not None:
        d = Path(cache_dir) / key
        if (d / "coeffs.csv").exists():
            log.info("loading cached eigensystem %s", d)
            es = load_eigensystem(d)
            if es.params != cfg.model or es.basis != cfg.basis:
                es = None
    if es is None:
        log.info("diagonalizing dimension %d (keep %d)", cfg.basis.dim, cfg.basis.keep)
        es = solve(cfg.model, cfg.basis)
        if cache_dir is not None:
            save_eigensystem(es, Path(cache_dir) / key)
    if memo is not None:
        memo[key] = es
    return es


def _provenance(cfg: RunConfig) -> list[str]:
    m, b = cfg.model, cfg.basis
    return [
        f"p={float(m.p)!r} r={float(m.r)!r} eps_plus={float(m.eps_plus)!r} eps_minus={float(m.eps_minus)!r}",
        f"n_osc={b.n_osc} keep={b.keep}",
    ]


def potential_window(cfg: RunConfig) -> tuple[float, float]:
    if cfg.potential_window is not None:
        return cfg.potential_window
    m = cfg.model
    qs = [abs(q) for b in Branch for q, _ in potential_minima(m, b)]
    half = 1.5 * max(qs + [3.0 / math.sqrt(2.0 * m.r)])
    return (-half, half)


def husimi_window(cfg: RunConfig, es: EigenSystem, lam: int) -> tuple[float, float, float, float]:
    """Configured window, or the bounding box of the orbits at E_lam padded by 10%."""
    if cfg.husimi_window is not None:
        return cfg.husimi_window
    orbs = orbits_at(cfg.model, es.energies[lam], cfg.orbit_points)
    pts = np.vstack([o.points for o in orbs])
    qpad = 0.1 * max(np.ptp(pts[:, 0]), 1.0)
    pmax = 1.1 * max(np.abs(pts[:, 1]).max(), 1.0)
    return (float(pts[:, 0].min() - qpad), float(pts[:, 0].max() + qpad), -float(pmax), float(pmax))


class _Run:
    """Bookkeeping for one pipeline invocation: emitted files and cleanup."""

    def __init__(self, cfg, out, cache_dir, memo):
        self.cfg = cfg
        self.out = Path(out)
        self.cache_dir = cache_dir
        self.memo = memo if memo is not None else {}
        self.files: list[str] = []
        self._es = None
        self.bands = band_windows(cfg.model, cfg.band_halfwidth)

    @property
    def es(self) -> EigenSystem:
        if self._es is None:
            self._es = get_eigensystem(self.cfg, self.cache_dir, self.memo)
        return self._es

    def path(self, name: str) -> Path:
        if name in self.files:
            raise RuntimeError(f"{name} emitted twice")
        self.files.append(name)
        return self.out / name

    def band_header(self) -> list[str]:
        return [f"band {k}: [{v[0]!r}, {v[1]!r}]" for k, v in self.bands.items()]

    def band_rows(self):
        """Kept states falling inside either band window, ascending."""
        e = self.es.energies
        sel = np.zeros(e.shape, dtype=bool)
        for lo, hi in self.bands.values():
            sel |= (e >= lo) & (e <= hi)
        return np.nonzero(sel)[0]

    # -- stages -------------------------------------------------------------

    def spectrum(self):
        cfg, es = self.cfg, self.es
        outputs.write_csv(self.path("energies.csv"), ["lambda", "energy"],
                          enumerate(es.energies.tolist()), _provenance(cfg))
        if cfg.check_convergence:
            rep = convergence_check(cfg.model, cfg.basis, cfg.convergence_tol, small=es)
            outputs.write_csv(
                self.path("convergence.csv"),
                ["n_osc_small", "n_osc_large", "keep", "max_abs_shift", "tolerance", "converged"],
                [(rep.n_osc_small, rep.n_osc_large, rep.keep, rep.max_abs_shift,
                  rep.tolerance, rep.converged)],
                _provenance(cfg),
            )

    def bloch(self):
        es = self.es
        x = bloch_projections(es)
        par = parity_expectations(es)
        outputs.write_csv(self.path("bloch.csv"), ["lambda", "energy", "x", "parity"],
                          zip(range(es.keep), es.energies.tolist(), x.tolist(), par.tolist()),
                          _provenance(self.cfg))

    def adiabatic(self):
        cfg = self.cfg
        q0, q1 = potential_window(cfg)
        q = np.linspace(q0, q1, cfg.potential_points)
        um, up = adiabatic_potentials(cfg.model, q)
        outputs.write_csv(self.path("adiabatic_potentials.csv"), ["Q", "U_minus", "U_plus"],
                          zip(q.tolist(), um.tolist(), up.tolist()), _provenance(cfg))
        fc = franck_condon_energies(cfg.model)
        rows = []
        for (name, branch), e in zip((("lower", Branch.LOWER), ("upper", Branch.UPPER)), fc):
            lo, hi = self.bands[name]
            rows.append((name, e, franck_condon_width(cfg.model, branch), lo, hi))
        outputs.write_csv(self.path("franck_condon.csv"),
                          ["branch", "energy", "fc_width", "band_min", "band_max"],
                          rows, _provenance(cfg))

    def husimi(self):
        cfg, es = self.cfg, self.es
        by_window: dict = {}
        for lam in dict.fromkeys(cfg.husimi_states):
            by_window.setdefault(husimi_window(cfg, es, lam), []).append(lam)
        for window, lams in by_window.items():
            grids = husimi_grids(es, lams, window, cfg.husimi_nq, cfg.husimi_np, cfg.husimi_spin)
            for g in grids:
                energy = float(es.energies[g.lam])
                orbs = orbits_at(cfg.model, energy, cfg.orbit_points)
                polys = [c for o in orbs for c in o.components]
                frac = tube_mass_fraction(g, polys, cfg.tube_halfwidth)
                head = _provenance(cfg) + [f"energy={energy!r} tube_fraction={frac!r}"]
                outputs.write_husimi_csv(self.path(f"husimi_{g.lam}.csv"), g, head)
                outputs.write_pgm(self.path(f"husimi_{g.lam}.pgm"), g, head)
                rows = [(o.branch.value, k, qq, pp)
                        for o in orbs for k, comp in enumerate(o.components) for qq, pp in comp.tolist()]
                outputs.write_csv(self.path(f"orbit_{g.lam}.csv"), ["branch", "component", "Q", "P"],
                                  rows, head)

    def absorb(self):
        es = self.es
        sel = self.band_rows()
        for o in self.cfg.optical:
            q = absorption_strengths(es, o)
            head = _provenance(self.cfg) + [f"mu1={o.mu1!r} mu2={o.mu2!r}"] + self.band_header()
            for name, window in self.bands.items():
                s = stick_spectrum(es, o, window)
                head.append(f"{name} total={s.total!r} mean_energy={s.mean_energy!r} lines={len(s)}")
            outputs.write_csv(self.path(f"absorption_{o.tag}.csv"), ["lambda", "energy", "strength"],
                              zip(sel.tolist(), es.energies[sel].tolist(), q[sel].tolist()), head)

    def ratio(self):
        es = self.es
        rc = ratio_curve(es)
        sel = self.band_rows()
        rows = [(int(l), rc.energies[l], rc.ratios[l] if rc.defined[l] else None, bool(rc.defined[l]))
                for l in sel]
        outputs.write_csv(self.path("ratio.csv"), ["lambda", "energy", "ratio", "defined"], rows,
                          _provenance(self.cfg) + self.band_header())

    def summary(self) -> list[dict]:
        """Band-level aggregates for every optical setting."""
        out = []
        for o in self.cfg.optical:
            for name, window in self.bands.items():
                s = stick_spectrum(self.es, o, window)
                out.append({"mu1": o.mu1, "mu2": o.mu2, "band": name, "lines": len(s),
                            "total_strength": s.total, "mean_energy": s.mean_energy})
        return out


def run_pipeline(cfg: RunConfig, out=None, stages=STAGES, cache_dir=None, memo=None,
                 _summary=None) -> dict[str, str]:
    """Run the selected stages and write ``manifest.csv``.

    Returns the manifest as {file name: sha256}.  On failure every file this
    run emitted is removed and a :class:`PipelineError` names the stage.
    """
    out = Path(out if out is not None else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    run = _Run(cfg, out, cache_dir, memo)
    stage = "setup"
    try:
        for stage in stages:
            if stage not in STAGES:
                raise ConfigError(f"unknown stage {stage!r}")
            log.info("stage %s", stage)
            getattr(run, stage)()
        stage = "manifest"
        outputs.write_manifest(out, run.files)
        if _summary is not None:
            stage = "summary"
            _summary.extend(run.summary())
    except Exception as exc:
        for name in run.files + ["manifest.csv"]:
            (out / name).unlink(missing_ok=True)
        if isinstance(exc, PipelineError):
            raise
        raise PipelineError(stage, f"{type(exc).__name__}: {exc}") from exc
    return outputs.read_manifest(out / "manifest.csv")


def _sweep_config(cfg: RunConfig, axis: str, value: float) -> RunConfig:
    if axis == "mu_ratio":
        opt = OpticalParams(0.0, 1.0) if math.isinf(value) else OpticalParams(1.0, float(value))
        return replace(cfg, optical=(opt,))
    if axis in ("p", "r", "eps_minus"):
        return cfg.with_model(**{axis: float(value)})
    raise ConfigError(f"sweep axis must be one of p, r, eps_minus, mu_ratio; got {axis!r}",
                      key="sweep_axis")


def sweep_label(axis: str, value: float) -> str:
    return f"{axis}={'inf' if math.isinf(value) else format(value, 'g')}"


def sweep(cfg: RunConfig, axis: str, values, out=None, stages=STAGES, cache_dir=None) -> dict:
    """Run the pipeline for each value into ``<out>/<axis>=<value>/``.

    Failures are recorded in ``sweep_summary.csv`` and the sweep continues.
    Returns {label: manifest dict or PipelineError}.
    """
    out = Path(out if out is not None else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    memo: dict = {}
    results: dict = {}
    rows = []
    for value in values:
        label = sweep_label(axis, value)
        summary: list = []
        try:
            sub = _sweep_config(cfg, axis, value)
            results[label] = run_pipeline(sub, out / label, stages, cache_dir, memo, summary)
        except (PipelineError, ConfigError, DomainError) as exc:
            if not isinstance(exc, PipelineError):
                exc = PipelineError("config", str(exc))
            log.warning("sweep %s failed: %s", label, exc)
            results[label] = exc
            rows.append((axis, value, None, None, None, None, None, None, f"error: {exc}".replace(",", ";")))
            continue
        for s in summary:
            rows.append((axis, value, s["mu1"], s["mu2"], s["band"], s["lines"],
                         s["total_strength"], s["mean_energy"], "ok"))
    outputs.write_csv(out / "sweep_summary.csv",
                      ["axis", "value", "mu1", "mu2", "band", "lines", "total_strength",
                       "mean_energy", "status"],
                      [tuple("inf" if isinstance(v, float) and math.isinf(v) else v for v in r)
                       for r in rows],
                      _provenance(cfg))
    return results

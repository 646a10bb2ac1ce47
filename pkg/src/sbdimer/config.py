"""
Flat ``key = value`` run configuration.

One assignment per line, ``#`` starts a comment, blank lines are ignored and
unknown or repeated keys are errors.  Lists are comma separated; optical
settings are written ``mu1:mu2``.  Example::

    # parameter set B
    p = 20
    r = 0.1
    eps_minus = 10
    optical = 1:1, 1:0, 0:1
    husimi_states = 300, 302, 303
    husimi_window = -120, 120, -10, 10
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .absorption import OpticalParams
from .errors import ConfigError, DomainError
from .model import BasisSpec, ModelParams
from .spin import SPIN_SYMMETRIC, SpinProjection

SWEEP_AXES = ("p", "r", "eps_minus", "mu_ratio")


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = ModelParams(p=0.5, r=0.1)
    basis: BasisSpec = BasisSpec()
    optical: tuple = (OpticalParams(1.0, 1.0),)
    husimi_states: tuple = ()
    husimi_window: tuple | None = None
    husimi_nq: int = 480
    husimi_np: int = 200
    husimi_spin: SpinProjection = SPIN_SYMMETRIC
    tube_halfwidth: float = 3.0
    orbit_points: int = 400
    band_halfwidth: float | None = None
    potential_window: tuple | None = None
    potential_points: int = 801
    check_convergence: bool = True
    convergence_tol: float = 1e-3
    out: str = "out"
    sweep_axis: str | None = None
    sweep_values: tuple = field(default_factory=tuple)

    def __post_init__(self):
        bad = [l for l in self.husimi_states if not 0 <= l < self.basis.keep]
        if bad:
            raise ConfigError(f"states {bad} not below keep={self.basis.keep}", key="husimi_states")

    def with_model(self, **changes) -> "RunConfig":
        return replace(self, model=replace(self.model, **changes))


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"non-finite number {s!r}")
    return v


def _int(s):
    v = int(s)
    return v


def _floats(n):
    def parse(s):
        vals = tuple(_float(x) for x in s.split(","))
        if len(vals) != n:
            raise ValueError(f"expected {n} comma-separated numbers")
        return vals
    return parse


def _auto(parser):
    def parse(s):
        return None if s.strip().lower() == "auto" else parser(s)
    return parse


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _optical_list(s):
    out = []
    for item in s.split(","):
        parts = item.split(":")
        if len(parts) != 2:
            raise ValueError(f"optical setting {item.strip()!r} is not mu1:mu2")
        out.append(OpticalParams(_float(parts[0]), _float(parts[1])))
    return tuple(out)


def _int_list(s):
    return tuple(int(x) for x in s.split(",") if x.strip())


def _value_list(s):
    vals = []
    for x in s.split(","):
        x = x.strip()
        if x.lower() in ("inf", "+inf", "infinity"):
            vals.append(math.inf)
        elif x:
            vals.append(float(x))
    return tuple(vals)


def _spin(s):
    a, b = _floats(2)(s)
    return SpinProjection.normalized(a, b)


def _axis(s):
    s = s.strip()
    if s not in SWEEP_AXES:
        raise ValueError(f"sweep axis must be one of {', '.join(SWEEP_AXES)}")
    return s


KEYS = {
    "p": _float,
    "r": _float,
    "eps_plus": _float,
    "eps_minus": _float,
    "n_osc": _int,
    "keep": _int,
    "optical": _optical_list,
    "husimi_states": _int_list,
    "husimi_window": _auto(_floats(4)),
    "husimi_nq": _int,
    "husimi_np": _int,
    "husimi_spin": _spin,
    "tube_halfwidth": _float,
    "orbit_points": _int,
    "band_halfwidth": _auto(_float),
    "potential_window": _auto(_floats(2)),
    "potential_points": _int,
    "check_convergence": _bool,
    "convergence_tol": _float,
    "out": str.strip,
    "sweep_axis": _axis,
    "sweep_values": _value_list,
}


def _check(key, val):
    """Per-key domain checks; returns an error message or None."""
    if key == "p" and val < 0:
        return "p must be >= 0"
    if key == "r" and val <= 0:
        return "r must be > 0"
    if key in ("n_osc", "keep", "potential_points", "orbit_points") and val < 1:
        return f"{key} must be positive"
    if key in ("husimi_nq", "husimi_np", "potential_points", "orbit_points") and val < 2:
        return f"{key} must be >= 2"
    if key == "husimi_window" and val is not None and not (val[1] > val[0] and val[3] > val[2]):
        return "window must satisfy qmin < qmax and pmin < pmax"
    if key == "potential_window" and val is not None and not val[1] > val[0]:
        return "window must satisfy qmin < qmax"
    if key in ("convergence_tol", "tube_halfwidth") and val < 0:
        return f"{key} must be non-negative"
    if key == "band_halfwidth" and val is not None and val <= 0:
        return "band_halfwidth must be positive"
    if key == "husimi_states" and any(v < 0 for v in val):
        return "state indices must be non-negative"
    return None


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration; omitted keys take defaults."""
    values: dict = {}
    lines: dict = {}
    for num, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {raw.strip()!r}", line=num)
        key, val = (t.strip() for t in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", line=num)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", line=num)
        try:
            parsed = KEYS[key](val)
        except (ValueError, DomainError) as exc:
            raise ConfigError(f"bad value {val!r}: {exc}", line=num, key=key) from None
        msg = _check(key, parsed)
        if msg:
            raise ConfigError(msg, line=num, key=key)
        values[key] = parsed
        lines[key] = num
    return build_config(values, lines)


def build_config(values: dict, lines: dict | None = None) -> RunConfig:
    lines = lines or {}
    d = RunConfig()

    def get(k, default):
        return values.get(k, default)

    try:
        model = ModelParams(p=get("p", d.model.p), r=get("r", d.model.r),
                            eps_plus=get("eps_plus", d.model.eps_plus),
                            eps_minus=get("eps_minus", d.model.eps_minus))
    except DomainError as exc:
        raise ConfigError(str(exc), key="model") from None
    try:
        basis = BasisSpec(n_osc=get("n_osc", d.basis.n_osc), keep=get("keep", d.basis.keep))
    except DomainError as exc:
        raise ConfigError(str(exc), line=lines.get("keep"), key="keep") from None

    kwargs = {k: v for k, v in values.items()
              if k not in ("p", "r", "eps_plus", "eps_minus", "n_osc", "keep")}
    try:
        return RunConfig(model=model, basis=basis, **kwargs)
    except ConfigError as exc:
        if exc.key and exc.line is None and exc.key in lines:
            raise ConfigError(str(exc).split(": ", 1)[-1], line=lines[exc.key], key=exc.key) from None
        raise


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())

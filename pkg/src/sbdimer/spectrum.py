"""Eigendecomposition of the assembled Hamiltonian and truncation checks."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import DomainError, EigensolverError, ResourceError
from .model import BasisSpec, ModelParams, SymmetricBandMatrix, build_hamiltonian


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Lowest ``keep`` eigenpairs in coefficient-table form.

    ``coeffs[lam, z, m]`` is the amplitude of |z, m> in eigenstate ``lam``
    (z = 0 up, z = 1 down).  Arrays are read-only.
    """

    params: ModelParams
    basis: BasisSpec
    energies: np.ndarray
    coeffs: np.ndarray
    _fingerprint: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        keep, n = self.basis.keep, self.basis.n_osc
        if self.energies.shape != (keep,) or self.coeffs.shape != (keep, 2, n):
            raise ValueError(
                f"shape mismatch: energies {self.energies.shape}, coeffs {self.coeffs.shape} "
                f"for keep={keep}, n_osc={n}"
            )
        self.energies.setflags(write=False)
        self.coeffs.setflags(write=False)

    @property
    def keep(self) -> int:
        return self.basis.keep

    @property
    def n_osc(self) -> int:
        return self.basis.n_osc

    @property
    def up(self) -> np.ndarray:
        """c_{up,m} table, shape (keep, n_osc)."""
        return self.coeffs[:, 0, :]

    @property
    def down(self) -> np.ndarray:
        return self.coeffs[:, 1, :]

    def check_index(self, lam: int) -> int:
        if isinstance(lam, (bool, np.bool_)) or int(lam) != lam:
            raise IndexError(f"eigenstate index must be an integer, got {lam!r}")
        lam = int(lam)
        if not 0 <= lam < self.keep:
            raise IndexError(f"eigenstate index {lam} outside kept range [0, {self.keep})")
        return lam

    def spin_vector(self, lam: int, m: int) -> np.ndarray:
        """The per-level spin amplitudes (c_up, c_down) of state ``lam``."""
        return self.coeffs[self.check_index(lam), :, m]

    def vectors(self) -> np.ndarray:
        """Eigenvectors as columns in the interleaved basis i = 2m + z."""
        return self.coeffs.transpose(0, 2, 1).reshape(self.keep, -1).T

    @property
    def fingerprint(self) -> str:
        """Content hash identifying this eigensystem."""
        if not self._fingerprint:
            h = hashlib.sha256()
            h.update(repr((self.params, self.basis)).encode())
            h.update(np.ascontiguousarray(self.energies).tobytes())
            h.update(np.ascontiguousarray(self.coeffs).tobytes())
            self._fingerprint.append(h.hexdigest())
        return self._fingerprint[0]


@dataclass(frozen=True)
class ConvergenceReport:
    n_osc_small: int
    n_osc_large: int
    keep: int
    max_abs_shift: float
    tolerance: float
    converged: bool


def fix_signs(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of every column positive.

    Ties go to the lowest index (``argmax`` returns the first maximum).
    """
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def diagonalize(h: SymmetricBandMatrix, keep: int) -> EigenSystem:
    """Lowest ``keep`` eigenpairs of ``h`` as an :class:`EigenSystem`."""
    basis = BasisSpec(n_osc=h.n_osc, keep=keep) if 0 < keep <= h.dim else None
    if basis is None:
        raise DomainError(f"keep={keep} must lie in [1, dim={h.dim}]")
    a = h.toarray()
    try:
        w, v = scipy.linalg.eigh(
            a, subset_by_index=[0, keep - 1], driver="evr",
            overwrite_a=True, check_finite=True,
        )
    except MemoryError as exc:
        raise ResourceError(f"eigensolver ran out of memory at dimension {h.dim}") from exc
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"symmetric eigensolver failed: {exc}") from exc
    if w.shape != (keep,) or not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise EigensolverError("eigensolver returned non-finite or truncated output")
    if np.any(np.diff(w) < 0):
        raise EigensolverError("eigenvalues are not ascending")

    v = fix_signs(v)
    coeffs = np.ascontiguousarray(v.T.reshape(keep, h.n_osc, 2).transpose(0, 2, 1))
    return EigenSystem(params=h.params, basis=basis, energies=np.ascontiguousarray(w), coeffs=coeffs)


def solve(m: ModelParams, b: BasisSpec) -> EigenSystem:
    """Build and diagonalize in one step."""
    return diagonalize(build_hamiltonian(m, b), b.keep)


def residuals(h: SymmetricBandMatrix, es: EigenSystem) -> np.ndarray:
    """Per-state ||H v - E v|| / max(1, |E|)."""
    v = es.vectors()
    r = h.matvec(v) - v * es.energies
    return np.linalg.norm(r, axis=0) / np.maximum(1.0, np.abs(es.energies))


def orthonormality_error(es: EigenSystem) -> float:
    """max |V^T V - I| over kept states."""
    v = es.vectors()
    return float(np.max(np.abs(v.T @ v - np.eye(es.keep))))


def convergence_check(m: ModelParams, b: BasisSpec, tolerance: float,
                      factor: float = 1.25, small: EigenSystem | None = None) -> ConvergenceReport:
    """Compare kept eigenvalues at ``b.n_osc`` and ``ceil(factor * n_osc)``.

    ``small`` may pass an already computed eigensystem for ``(m, b)``.
    """
    if tolerance < 0:
        raise DomainError("tolerance must be non-negative")
    n_large = math.ceil(factor * b.n_osc)
    if small is None or small.params != m or small.basis != b:
        small = solve(m, b)
    large = solve(m, BasisSpec(n_osc=n_large, keep=b.keep))
    shift = float(np.max(np.abs(small.energies - large.energies)))
    return ConvergenceReport(
        n_osc_small=b.n_osc, n_osc_large=n_large, keep=b.keep,
        max_abs_shift=shift, tolerance=tolerance, converged=shift <= tolerance,
    )


# -- text serialization -----------------------------------------------------

def _header(es: EigenSystem) -> str:
    m, b = es.params, es.basis
    return (
        f"# p={float(m.p)!r} r={float(m.r)!r} eps_plus={float(m.eps_plus)!r} eps_minus={float(m.eps_minus)!r}\n"
        f"# n_osc={b.n_osc} keep={b.keep}\n"
    )


def _parse_header(path: Path) -> tuple[ModelParams, BasisSpec]:
    vals = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            for tok in line[1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    vals[k] = v
    try:
        m = ModelParams(p=float(vals["p"]), r=float(vals["r"]),
                        eps_plus=float(vals["eps_plus"]), eps_minus=float(vals["eps_minus"]))
        b = BasisSpec(n_osc=int(vals["n_osc"]), keep=int(vals["keep"]))
    except KeyError as exc:
        raise ValueError(f"{path}: missing header field {exc}") from None
    return m, b


def save_eigensystem(es: EigenSystem, directory) -> tuple[Path, Path]:
    """Write ``energies.csv`` and ``coeffs.csv`` into ``directory``.

    energies.csv has columns ``lambda,energy``; coeffs.csv has
    ``lambda,z,m,c`` with z = 0 for up, 1 for down.  Floats use 17
    significant digits so a reload is bit-exact.
    """
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    head = _header(es)
    e_path = d / "energies.csv"
    with open(e_path, "w", newline="\n") as fh:
        fh.write(head + "lambda,energy\n")
        for lam, e in enumerate(es.energies):
            fh.write(f"{lam},{float(e)!r}\n")

    keep, n = es.keep, es.n_osc
    lam = np.repeat(np.arange(keep), 2 * n)
    z = np.tile(np.repeat([0, 1], n), keep)
    mm = np.tile(np.arange(n), 2 * keep)
    c_path = d / "coeffs.csv"
    with open(c_path, "w", newline="\n") as fh:
        fh.write(head + "lambda,z,m,c\n")
        table = np.column_stack([lam, z, mm, es.coeffs.reshape(-1)])
        np.savetxt(fh, table, fmt=("%d", "%d", "%d", "%.17g"), delimiter=",")
    return e_path, c_path


def load_eigensystem(directory) -> EigenSystem:
    d = Path(directory)
    m, b = _parse_header(d / "energies.csv")
    energies = np.loadtxt(d / "energies.csv", delimiter=",", comments="#", skiprows=3,
                          usecols=1, ndmin=1)
    table = np.loadtxt(d / "coeffs.csv", delimiter=",", comments="#", skiprows=3, ndmin=2)
    expected = b.keep * 2 * b.n_osc
    if table.shape[0] != expected:
        raise ValueError(f"{d / 'coeffs.csv'}: expected {expected} rows, found {table.shape[0]}")
    coeffs = np.zeros((b.keep, 2, b.n_osc))
    coeffs[table[:, 0].astype(int), table[:, 1].astype(int), table[:, 2].astype(int)] = table[:, 3]
    return EigenSystem(params=m, basis=b, energies=energies, coeffs=coeffs)

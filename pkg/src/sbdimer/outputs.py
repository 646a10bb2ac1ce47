"""CSV, PGM and manifest writers.  All output is byte-deterministic."""
from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

PGM_MAX = 65535


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "" if x != x else repr(x)
    return str(x)


def write_csv(path, columns, rows, header=()) -> Path:
    """Write ``#``-prefixed header lines, a column line, then the rows."""
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        for h in header:
            fh.write(f"# {h}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def read_csv(path):
    """Column names and data rows (as strings) of a file from :func:`write_csv`."""
    with open(path) as fh:
        lines = [l.rstrip("\n") for l in fh if not l.startswith("#")]
    cols = lines[0].split(",")
    return cols, [l.split(",") for l in lines[1:]]


def _image(values: np.ndarray) -> np.ndarray:
    """Grid indexed [q, p] -> image rows from p_max down, Q across."""
    return np.asarray(values)[:, ::-1].T


def write_husimi_csv(path, grid, header=()) -> Path:
    """Husimi matrix: one line per P value (descending), one column per Q."""
    q0, q1, p0, p1 = grid.window
    head = list(header) + [
        f"lambda={grid.lam} window=({q0!r},{q1!r},{p0!r},{p1!r}) nq={grid.nq} np={grid.np}",
        f"spin=({grid.spin.c_up!r},{grid.spin.c_down!r})",
        "rows: P from pmax to pmin; columns: Q from qmin to qmax",
    ]
    img = _image(grid.values)
    cols = [f"q{i}" for i in range(grid.nq)]
    return write_csv(path, cols, img.tolist(), head)


def write_pgm(path, grid, header=()) -> Path:
    """Plain (P2) 16-bit graymap scaled to the grid maximum."""
    img = _image(grid.values)
    vmax = float(img.max())
    scaled = np.zeros(img.shape, dtype=np.int64) if vmax <= 0 else np.rint(img / vmax * PGM_MAX).astype(np.int64)
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write("P2\n")
        for h in header:
            fh.write(f"# {h}\n")
        fh.write(f"# lambda={grid.lam} max={vmax!r}\n")
        fh.write(f"{img.shape[1]} {img.shape[0]}\n{PGM_MAX}\n")
        for row in scaled:
            fh.write(" ".join(map(str, row.tolist())) + "\n")
    return path


def read_pgm(path) -> np.ndarray:
    tokens = []
    with open(path) as fh:
        for line in fh:
            tokens.extend(line.split("#", 1)[0].split())
    if tokens[0] != "P2":
        raise ValueError(f"{path}: not a plain PGM")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.array(tokens[4:], dtype=np.int64)
    if data.size != w * h or data.max(initial=0) > maxval:
        raise ValueError(f"{path}: malformed raster")
    return data.reshape(h, w)


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(directory, names) -> Path:
    """``manifest.csv`` with file, bytes and sha256 for every listed file."""
    d = Path(directory)
    rows = [(n, (d / n).stat().st_size, sha256(d / n)) for n in sorted(names)]
    return write_csv(d / "manifest.csv", ["file", "bytes", "sha256"], rows)


def read_manifest(path) -> dict[str, str]:
    _, rows = read_csv(path)
    return {r[0]: r[2] for r in rows}

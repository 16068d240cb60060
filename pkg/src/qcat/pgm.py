"""PGM (P2/P5) reader and writer for phase-space densities.

Image row 0 is the top of the picture and maps to the highest momentum row:
pixel (row r, column c) <-> cell (i = c, j = n - 1 - r).  Written pixels are
round(255 * rho / max rho), so support is preserved exactly and values up to
the 1/255 quantization.
"""

from __future__ import annotations

import os

import numpy as np

from .lattice import DensityGrid, LatticeSpec


class PgmError(ValueError):
    pass


def _tokens(data: bytes):
    """PGM header tokens, skipping whitespace and # comments."""
    pos = 0
    while True:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            return
        yield data[start:pos], pos


def read_density_pgm(path, spec: LatticeSpec | None = None) -> DensityGrid:
    with open(path, "rb") as fh:
        data = fh.read()
    tok = _tokens(data)
    try:
        magic, _ = next(tok)
        width, _ = next(tok)
        height, _ = next(tok)
        maxval, end = next(tok)
    except StopIteration:
        raise PgmError(f"{path}: truncated PGM header") from None
    if magic not in (b"P2", b"P5"):
        raise PgmError(f"{path}: not a PGM file (magic {magic!r})")
    width, height, maxval = int(width), int(height), int(maxval)
    if width != height:
        raise PgmError(f"{path}: image must be square, got {width}x{height}")
    if not (0 < maxval <= 65535):
        raise PgmError(f"{path}: maxval {maxval} out of range")
    n = width
    if n < 2 or n & (n - 1):
        raise PgmError(f"{path}: size {n} is not a power of two")
    if spec is None:
        spec = LatticeSpec(n.bit_length() - 1)
    elif spec.n != n:
        raise PgmError(f"{path}: size {n} does not match n_q={spec.n_q} (need {spec.n})")

    if magic == b"P2":
        values = np.array(data[end:].split(), dtype=np.int64)
    else:
        raw = data[end + 1 :]  # single whitespace byte after maxval
        if maxval > 255:
            values = np.frombuffer(raw[: 2 * n * n], dtype=">u2").astype(np.int64)
        else:
            values = np.frombuffer(raw[: n * n], dtype=np.uint8).astype(np.int64)
    if values.size != n * n:
        raise PgmError(f"{path}: expected {n * n} pixels, got {values.size}")
    if values.min() < 0 or values.max() > maxval:
        raise PgmError(f"{path}: pixel values outside [0, {maxval}]")
    img = values.reshape(n, n)
    weights = img[::-1, :].T.astype(np.float64)  # (row, col) -> (i, j)
    if weights.sum() == 0:
        raise PgmError(f"{path}: image is all zero")
    return DensityGrid.normalized(spec, weights)


def _atomic_write(path, data: bytes) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def write_density_pgm(grid: DensityGrid, path, binary: bool = False) -> None:
    n = grid.spec.n
    w = grid.weights
    pix = np.round(255.0 * w / w.max()).astype(np.uint8)
    img = pix.T[::-1, :]  # (i, j) -> (row, col)
    if binary:
        payload = b"P5\n%d %d\n255\n" % (n, n) + img.tobytes()
    else:
        body = "\n".join(" ".join(str(v) for v in row) for row in img)
        payload = (f"P2\n{n} {n}\n255\n{body}\n").encode("ascii")
    _atomic_write(path, payload)

"""Plain-text matrix interchange, so external codes can feed the Babinet verifier.

Layout (whitespace separated, ``#`` starts a comment)::

    casimir-babinet-matrices 1
    basis period=1.0 orders=4 kappa=1.2 kx=0.37 ky=0.5
    block R_MM real 9 9
    <9 rows of 9 numbers>
    block T_EE complex 9 9
    <9 rows of 18 numbers: re im re im ...>
    ...

Blocks are row-major with the outgoing order as row index and orders
running ``-P..P``.  Names follow :class:`~casimir_babinet.babinet.EmBlockSet`
(``R_EE``, ``R_EM``, ... ``T_MM``) or ``R``/``T`` for a scalar channel.
Numbers are written with 17 significant digits so a round trip is exact.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ConfigError
from .wavemodes import OrderBasis

MAGIC = "casimir-babinet-matrices"
VERSION = 1


def dumps(basis: OrderBasis, blocks: dict) -> str:
    lines = [
        f"{MAGIC} {VERSION}",
        f"basis period={basis.period!r} orders={basis.P} kappa={basis.kappa!r} kx={basis.kx!r} ky={basis.ky!r}",
    ]
    for name, mat in blocks.items():
        m = np.asarray(mat)
        if m.shape != (basis.dim, basis.dim):
            raise ConfigError(f"block {name} has shape {m.shape}, basis needs {basis.dim}")
        kind = "complex" if np.iscomplexobj(m) else "real"
        lines.append(f"block {name} {kind} {m.shape[0]} {m.shape[1]}")
        for row in m:
            if kind == "complex":
                vals = np.column_stack([row.real, row.imag]).ravel()
            else:
                vals = row
            lines.append(" ".join(f"{v:.17g}" for v in vals))
    return "\n".join(lines) + "\n"


def write_matrices(path, basis: OrderBasis, blocks: dict) -> None:
    Path(path).write_text(dumps(basis, blocks))


def loads(text: str):
    """Parse the interchange format; returns ``(OrderBasis, {name: matrix})``."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0].split()[0] != MAGIC:
        raise ConfigError("not a casimir-babinet matrix file")
    header = lines[0].split()
    if len(header) < 2 or int(header[1]) != VERSION:
        raise ConfigError(f"unsupported matrix file version: {lines[0]}")
    if len(lines) < 2 or not lines[1].startswith("basis"):
        raise ConfigError("missing basis line")
    try:
        fields = dict(tok.split("=", 1) for tok in lines[1].split()[1:])
        basis = OrderBasis(
            float(fields["period"]),
            int(fields["orders"]),
            float(fields["kappa"]),
            float(fields.get("kx", 0.0)),
            float(fields.get("ky", 0.0)),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad basis line {lines[1]!r}: {exc}") from exc

    blocks = {}
    i = 2
    while i < len(lines):
        parts = lines[i].split()
        if parts[0] != "block" or len(parts) != 5:
            raise ConfigError(f"expected a block header, got {lines[i]!r}")
        _, name, kind, nr, nc = parts
        nr, nc = int(nr), int(nc)
        rows = lines[i + 1 : i + 1 + nr]
        if len(rows) != nr:
            raise ConfigError(f"block {name}: expected {nr} rows")
        try:
            data = np.array([[float(v) for v in row.split()] for row in rows])
        except ValueError as exc:
            raise ConfigError(f"block {name}: {exc}") from exc
        width = 2 * nc if kind == "complex" else nc
        if data.shape != (nr, width):
            raise ConfigError(f"block {name}: expected {nr}x{width} numbers, got {data.shape}")
        if kind == "complex":
            data = data[:, 0::2] + 1j * data[:, 1::2]
        elif kind != "real":
            raise ConfigError(f"block {name}: unknown kind {kind!r}")
        blocks[name] = data
        i += 1 + nr
    return basis, blocks


def read_matrices(path):
    return loads(Path(path).read_text())

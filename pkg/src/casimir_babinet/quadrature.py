"""Composite Gauss-Legendre rules with geometric grading toward an endpoint."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, a: float, b: float):
    """``n``-point Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite(breaks, n: int):
    """Gauss-Legendre with ``n`` nodes on every panel between consecutive breaks.

    The rule is open: no node sits on a break point.
    """
    breaks = np.asarray(breaks, dtype=float)
    if np.any(np.diff(breaks) <= 0):
        raise ValueError("break points must be strictly increasing")
    xs, ws = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        x, w = gauss_legendre(n, a, b)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def graded_breaks(length: float, levels: int, ratio: float = 0.15):
    """``[0, L r^levels, ..., L r, L]``: panels shrinking geometrically toward 0.

    Geometric grading turns an endpoint singularity such as ``x log x`` into
    exponential convergence in the number of panels.
    """
    if levels < 0:
        raise ValueError("levels must be >= 0")
    inner = length * ratio ** np.arange(levels, 0, -1)
    return np.concatenate([[0.0], inner, [length]])


def semi_infinite_breaks(x_grade: float, x_max: float, levels: int, ratio: float = 0.15, growth: float = 1.8):
    """Break points on ``[0, x_max]``: graded below ``x_grade``, then panels
    growing by ``growth``, sized for integrands with an ``exp(-x)`` envelope."""
    head = graded_breaks(x_grade, levels, ratio)
    tail = [x_grade]
    step = x_grade
    while tail[-1] < x_max:
        step *= growth
        tail.append(min(tail[-1] + step, x_max))
    return np.concatenate([head, tail[1:]])

"""Multi-start projected gradient ascent on a box, shared by the local searches."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .forward import SingularSystemError


@dataclass
class AscentResult:
    x: np.ndarray
    value: float
    iterations: int
    converged: bool


@dataclass
class MultiStartResult:
    finals: list = field(default_factory=list)   # final value per successful restart
    points: list = field(default_factory=list)   # final x per successful restart
    restart_ids: list = field(default_factory=list)
    iterations: list = field(default_factory=list)
    failed: list = field(default_factory=list)   # restart indices that hit a singular solve

    @property
    def best_index(self) -> int:
        return int(np.argmax(self.finals))


def projected_ascent(fun_grad: Callable, x0: np.ndarray, lower: float, upper: float,
                     rtol: float = 1e-8, max_iter: int = 2000,
                     armijo: float = 1e-4, max_backtracks: int = 40) -> AscentResult:
    """Maximize ``fun_grad(x) -> (f, g)`` over ``lower <= x <= upper``.

    Spectral (Barzilai-Borwein) step lengths with an Armijo backtracking
    safeguard. Stops when the objective changes by less than ``rtol``
    relative, when the projected step vanishes, or after ``max_iter``
    iterations. The iterate is projected onto the box at every step.
    """
    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    f, g = fun_grad(x)
    width = upper - lower
    if width == 0:
        return AscentResult(x, f, 0, True)
    gmax = np.abs(g).max()
    step = width / gmax if gmax > 0 else 1.0
    for it in range(1, max_iter + 1):
        d = np.clip(x + step * g, lower, upper) - x
        slope = g @ d
        if not np.any(d) or slope <= 0:
            return AscentResult(x, f, it - 1, True)
        t = 1.0
        for _ in range(max_backtracks):
            x_new = x + t * d
            np.clip(x_new, lower, upper, out=x_new)
            f_new, g_new = fun_grad(x_new)
            if f_new >= f + armijo * t * slope:
                break
            t *= 0.5
        else:
            return AscentResult(x, f, it, True)
        s, y = x_new - x, g_new - g
        sy = s @ y
        step = (s @ s) / (-sy) if sy < 0 else 1e3 * width / max(np.abs(g_new).max(), 1e-300)
        step = float(np.clip(step, 1e-12 * width, 1e12 * width))
        change = abs(f_new - f)
        x, f, g = x_new, f_new, g_new
        if change <= rtol * max(abs(f), 1e-300):
            return AscentResult(x, f, it, True)
    return AscentResult(x, f, max_iter, False)


def multistart(fun_grad: Callable, starts, lower: float, upper: float,
               **options) -> MultiStartResult:
    """Run :func:`projected_ascent` from each start; singular solves mark a restart failed."""
    out = MultiStartResult()
    for i, x0 in enumerate(starts):
        try:
            res = projected_ascent(fun_grad, x0, lower, upper, **options)
        except SingularSystemError:
            out.failed.append(i)
            continue
        out.finals.append(float(res.value))
        out.points.append(res.x)
        out.restart_ids.append(i)
        out.iterations.append(res.iterations)
    return out


def restart_rng(seed: int, index: int) -> np.random.Generator:
    # one stream per restart, so the first n starts do not depend on the total count
    return np.random.default_rng([int(seed), int(index)])

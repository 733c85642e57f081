"""Shared numerical machinery: adaptive ODE integration and finite differences.

All derivative helpers accept functions that are vectorized over leading axes,
i.e. ``f(x)`` with ``x`` of shape ``(..., d)``.  The stencil points are stacked
and evaluated in a single call, which matters when ``f`` is itself an ODE
solve: every stencil point then sees the same adaptive step sequence and the
differences stay smooth.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

# first derivatives / second-and-third derivatives
FD_STEP_1 = 1e-5
FD_STEP_2 = 1e-3


class IntegrationError(RuntimeError):
    """Raised when the adaptive integrator gives up."""

    def __init__(self, message, worst_point=None):
        super().__init__(message)
        self.worst_point = worst_point


class DomainError(ValueError):
    """A point left the chart domain of a model."""


@dataclass(frozen=True)
class IntegratorOptions:
    rtol: float = 1e-10
    atol: float = 1e-10
    method: str = "RK45"
    max_step: float = np.inf

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("integrator tolerances must be positive")


DEFAULT_OPTIONS = IntegratorOptions()


def integrate(rhs, y0, t0, t1, options=DEFAULT_OPTIONS, t_eval=None, breakpoints=()):
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t1`` and return the final state.

    ``y0`` may have any shape; ``rhs`` receives and returns arrays of that shape.
    Interior ``breakpoints`` (where the right-hand side may have a kink) split
    the integration into smooth pieces.  With ``t_eval`` the states at those
    times are returned instead, stacked along a new leading axis.
    """
    y0 = np.asarray(y0, dtype=float)
    shape = y0.shape
    requested = None if t_eval is None else np.asarray(t_eval, dtype=float)
    if t0 == t1:
        if requested is None:
            return y0.copy()
        return np.broadcast_to(y0, (len(requested),) + shape).copy()

    def flat_rhs(t, y):
        return np.asarray(rhs(t, y.reshape(shape)), dtype=float).ravel()

    lo, hi = min(t0, t1), max(t0, t1)
    cuts = sorted(b for b in breakpoints if lo < b < hi)
    if t1 < t0:
        cuts = cuts[::-1]
    knots = [t0, *cuts, t1]
    state = y0.ravel()
    samples = {}
    for a, b in zip(knots[:-1], knots[1:]):
        piece_eval = None
        if requested is not None:
            inside = requested[(requested >= min(a, b)) & (requested <= max(a, b))]
            piece_eval = np.unique(np.append(inside, [a, b]))
            if b < a:
                piece_eval = piece_eval[::-1]
        sol = solve_ivp(flat_rhs, (a, b), state, method=options.method,
                        rtol=options.rtol, atol=options.atol,
                        max_step=options.max_step, t_eval=piece_eval)
        if sol.status != 0:
            worst = sol.y[:, -1].reshape(shape) if sol.y.size else y0
            raise IntegrationError(f"integration failed on [{a}, {b}]: {sol.message}", worst)
        state = sol.y[:, -1]
        if not np.all(np.isfinite(state)):
            raise IntegrationError(f"non-finite state on [{a}, {b}]", state.reshape(shape))
        if requested is not None:
            for t, y in zip(sol.t, sol.y.T):
                samples.setdefault(float(t), y)
    if requested is None:
        return state.reshape(shape)
    return np.stack([samples[float(t)].reshape(shape) for t in requested])


def _offsets(x, h):
    d = x.shape[-1]
    return np.eye(d).reshape((d,) + (1,) * (x.ndim - 1) + (d,)) * h


def _central(f, x, h):
    d = x.shape[-1]
    step = _offsets(x, h)
    vals = np.asarray(f(np.concatenate([x[None] + step, x[None] - step])), dtype=float)
    return (vals[:d] - vals[d:]) / (2 * h)


def derivative(f, x, h=FD_STEP_1, richardson=True):
    """Central-difference derivative of a vectorized map at ``x``.

    Returns an array whose *first* axis indexes the differentiation direction,
    ``out[i] = ∂f/∂x^i``.  One level of Richardson extrapolation by default.
    """
    x = np.asarray(x, dtype=float)
    coarse = _central(f, x, h)
    if not richardson:
        return coarse
    return (4 * _central(f, x, h / 2) - coarse) / 3


def jacobian(f, x, h=FD_STEP_1, richardson=True):
    """Jacobian ``J[..., a, i] = ∂f^a/∂x^i`` of a vector-valued vectorized map."""
    return np.moveaxis(derivative(f, x, h, richardson), 0, -1)


def gradient(f, x, h=FD_STEP_1, richardson=True):
    """Gradient of a scalar vectorized function, shape ``(..., d)``."""
    return np.moveaxis(derivative(f, x, h, richardson), 0, -1)


def hessian(f, x, h=FD_STEP_2, richardson=True):
    """Second-derivative matrix of a scalar vectorized function at one point.

    ``f`` may return trailing axes; the Hessian axes are then the last two.
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]

    def level(step):
        eye = np.eye(d) * step
        signs = ((1, 1), (1, -1), (-1, 1), (-1, -1))
        pts = np.array([x + si * eye[i] + sj * eye[j]
                        for i in range(d) for j in range(d) for si, sj in signs])
        vals = np.asarray(f(pts), dtype=float)
        quad = vals.reshape((d, d, 4) + vals.shape[1:])
        out = (quad[:, :, 0] - quad[:, :, 1] - quad[:, :, 2] + quad[:, :, 3]) / (4 * step * step)
        out = np.moveaxis(out, (0, 1), (-2, -1))
        return 0.5 * (out + np.swapaxes(out, -1, -2))

    coarse = level(h)
    if not richardson:
        return coarse
    return (4 * level(h / 2) - coarse) / 3


def slope_fit(xs, ys):
    """Least-squares slope of ``log ys`` against ``log xs``."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def gauss_legendre_unit(n):
    """Nodes and weights of ``n``-point Gauss-Legendre on ``[0, 1]``."""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return 0.5 * (nodes + 1.0), 0.5 * weights

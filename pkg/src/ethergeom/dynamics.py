"""Paths realized as diffeomorphisms by integrating the internal field along them.

Along a path ``y(t)`` the point ``Y`` moves by

    dY/dt = c · A_{y(t)}(Y) ẏ(t),

with ``c = 1`` for Ether translations ``g`` (path-shape independent) and
``c = ½`` for path symplectomorphisms ``[σ]`` (shape dependent, mapping the
path's start to its end).  Ordered exponentials are never formed explicitly;
every map is an ODE flow composed in increasing ``t``.
"""
from __future__ import annotations

import numpy as np

from . import paths as P
from .models import symplectic_defect
from .numerics import DEFAULT_OPTIONS, FD_STEP_1, integrate, jacobian


class FlowSegment(P.Path):
    """Path traced by an autonomous flow ``ẏ = rhs(y)`` from ``y0`` over time
    ``duration``, reparametrized to ``[0, 1]``.

    Path maps driven by a segment integrate the driving trajectory jointly
    with their own state, so no interpolation of the trajectory is involved.
    """

    def __init__(self, rhs, y0, duration, options=DEFAULT_OPTIONS, label="flow"):
        self.rhs = rhs
        self.y0 = np.asarray(y0, dtype=float)
        self.duration = float(duration)
        self.options = options
        super().__init__(self._pos, self._vel, label=label)

    def _pos(self, s):
        return integrate(lambda t, y: self.rhs(y), self.y0, 0.0, s * self.duration, self.options)

    def _vel(self, s):
        return self.duration * self.rhs(self._pos(s))

    def drive(self, y):
        """Velocity in the unit parameter at driver state ``y``."""
        return self.duration * self.rhs(y)

    def reversed(self):
        raise NotImplementedError("flow segments are driven forward only; use PathMap.inverse")


class PathMap:
    """Diffeomorphism obtained by integrating the internal field along ``path``.

    ``evaluate``, ``inverse`` and ``differential`` re-integrate per call and
    accept batches of points of shape ``(..., d)``.
    """

    def __init__(self, field, path, half_factor, options=DEFAULT_OPTIONS):
        self.field = field
        self.path = path
        self.half_factor = bool(half_factor)
        self.factor = 0.5 if half_factor else 1.0
        self.options = options

    @property
    def model(self):
        return self.field.model

    @property
    def driven(self):
        return isinstance(self.path, FlowSegment)

    # -- core integration ---------------------------------------------------

    def _velocity(self, y, yd, Y):
        return self.factor * self.field.apply(y, Y, yd)

    def _field_jacobian(self, y, yd, Y):
        return jacobian(lambda zz: self._velocity(y, yd, zz), Y, FD_STEP_1)

    def _run(self, z, forward=True, with_differential=False):
        z = np.asarray(z, dtype=float)
        d = z.shape[-1]
        batch = z.shape[:-1]
        pts = z.reshape(-1, d)
        count = pts.shape[0]
        t0, t1 = (0.0, 1.0) if forward else (1.0, 0.0)
        if self.driven and not forward:
            start = self._driver_end()
        elif self.driven:
            start = self.path.y0
        else:
            start = None

        def unpack(state):
            body = state[:count]
            drv = state[count, :d] if self.driven else None
            return body, drv

        def rhs(t, state):
            body, drv = unpack(state)
            if self.driven:
                y, yd = drv, self.path.drive(drv)
            else:
                y, yd = self.path(t)
            Y = body[:, :d]
            out = np.zeros_like(state)
            out[:count, :d] = self._velocity(y, yd, Y)
            if with_differential:
                J = body[:, d:].reshape(count, d, d)
                F = self._field_jacobian(y, yd, Y)
                out[:count, d:] = (F @ J).reshape(count, d * d)
            if self.driven:
                out[count, :d] = yd
            return out

        width = d + d * d if with_differential else d
        state = np.zeros((count + (1 if self.driven else 0), width))
        state[:count, :d] = pts
        if with_differential:
            state[:count, d:] = np.tile(np.eye(d).ravel(), (count, 1))
        if self.driven:
            state[count, :d] = start
        breaks = () if self.driven else self.path.breakpoints
        final = integrate(rhs, state, t0, t1, self.options, breakpoints=breaks)
        image = final[:count, :d].reshape(batch + (d,))
        if not with_differential:
            return image
        jac = final[:count, d:].reshape(batch + (d, d))
        return image, jac

    def _driver_end(self):
        if not hasattr(self, "_end_cache"):
            self._end_cache = self.path.end
        return self._end_cache

    # -- public surface -----------------------------------------------------

    def evaluate(self, z):
        return self._run(z, forward=True)

    __call__ = evaluate

    def inverse(self, z):
        return self._run(z, forward=False)

    def differential(self, z):
        """``(φ(z), Dφ(z))`` from the variational ODE integrated jointly."""
        return self._run(z, forward=True, with_differential=True)

    def symplectic_defect(self, z):
        image, jac = self.differential(z)
        return symplectic_defect(self.model, jac, z, image)

    def __repr__(self):
        kind = "[σ]" if self.half_factor else "g"
        return f"<PathMap {kind} along {self.path.label} on {self.model.name}>"


def ether_translation(field, path, options=DEFAULT_OPTIONS):
    """``g_{y1,y0}``: full internal field along ``path``."""
    return PathMap(field, path, half_factor=False, options=options)


def path_symplectomorphism(field, path, options=DEFAULT_OPTIONS):
    """``[σ]``: internal field with factor ½ along ``path``."""
    return PathMap(field, path, half_factor=True, options=options)


def ether_exponential(field, x, v, t=1.0, options=DEFAULT_OPTIONS):
    """``Exp_x(vt)``: integrate ``dE/dτ = ½ A_x(E) v`` from ``E(0) = x``.

    ``v`` may be a batch of shape ``(..., d)``.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    start = np.broadcast_to(x, v.shape).copy()

    def rhs(tau, E):
        return 0.5 * field.apply(x, E, v)

    return integrate(rhs, start, 0.0, t, options)


def groupoid_compose(m2, m1):
    """Path map of the concatenated path ``σ2 ∘ σ1`` (``σ1`` first)."""
    if m1.field is not m2.field or m1.half_factor != m2.half_factor:
        raise ValueError("can only compose path maps of the same kind and field")
    if not np.allclose(m1.path.end, m2.path.start, atol=1e-10):
        raise ValueError(f"endpoint mismatch: {m1.path.end} != {m2.path.start}")
    return PathMap(m1.field, m1.path.then(m2.path), m1.half_factor, m1.options)


def reflection_commutation_check(field, path, z, options=DEFAULT_OPTIONS):
    """``‖[σ](s_x(z)) − s_y([σ](z))‖`` for ``σ`` from ``x`` to ``y``."""
    z = np.asarray(z, dtype=float)
    x, y = path.start, path.end
    sigma = path_symplectomorphism(field, path, options)
    lhs = sigma(field.reflect(x, z))
    rhs = field.reflect(y, sigma(z))
    return float(np.max(np.linalg.norm(lhs - rhs, axis=-1)))


def reflection_composition_check(field, path, z, options=DEFAULT_OPTIONS):
    """``‖g_{y,x}(z) − s_y(s_x(z))‖`` for ``path`` from ``x`` to ``y``."""
    z = np.asarray(z, dtype=float)
    g = ether_translation(field, path, options)
    ref = field.reflect(path.end, field.reflect(path.start, z))
    return float(np.max(np.linalg.norm(g(z) - ref, axis=-1)))


def exponential_reflection_check(field, x, v, options=DEFAULT_OPTIONS):
    """``‖s_x(Exp_x(v)) − Exp_x(−v)‖``."""
    v = np.asarray(v, dtype=float)
    both = ether_exponential(field, x, np.stack([v, -v]), 1.0, options)
    return float(np.max(np.linalg.norm(field.reflect(x, both[0]) - both[1], axis=-1)))

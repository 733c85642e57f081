"""Parametrized C¹ paths ``t ↦ (y(t), ẏ(t))`` on ``[0, 1]``.

Paths are callables.  Concatenation and reversal keep track of the parameter
values where the velocity may jump (``breakpoints``) so that integrators can
restart there instead of stepping across a kink.
"""
from __future__ import annotations

import numpy as np

from .numerics import gauss_legendre_unit


class Path:
    """A path given by position and velocity callables on ``[0, 1]``."""

    def __init__(self, position, velocity, breakpoints=(), label="path"):
        self._position = position
        self._velocity = velocity
        self.breakpoints = tuple(sorted(breakpoints))
        self.label = label

    def __call__(self, t):
        return (np.asarray(self._position(t), dtype=float),
                np.asarray(self._velocity(t), dtype=float))

    def position(self, t):
        return np.asarray(self._position(t), dtype=float)

    @property
    def start(self):
        return self.position(0.0)

    @property
    def end(self):
        return self.position(1.0)

    def reversed(self):
        return Path(lambda t: self._position(1.0 - t),
                    lambda t: -np.asarray(self._velocity(1.0 - t)),
                    tuple(1.0 - b for b in self.breakpoints),
                    label=f"reverse({self.label})")

    def then(self, other):
        """``other ∘ self``: run ``self`` on ``[0, ½]`` then ``other`` on ``[½, 1]``."""
        if not np.allclose(self.end, other.start, atol=1e-10):
            raise ValueError(f"cannot concatenate: {self.end} != {other.start}")
        return concatenate([self, other])

    def pieces(self):
        """Sub-intervals of ``[0, 1]`` on which the path is smooth."""
        knots = (0.0, *self.breakpoints, 1.0)
        return list(zip(knots[:-1], knots[1:]))

    def sample(self, per_piece):
        """Positions at ``per_piece + 1`` uniform parameters on every smooth piece
        (shared knots appear once)."""
        ts = [0.0]
        for a, b in self.pieces():
            ts.extend(np.linspace(a, b, per_piece + 1)[1:])
        ts = np.array(ts)
        return ts, np.array([self.position(t) for t in ts])

    def velocity_defect(self, checks=7, h=1e-6):
        """Max gap between ``ẏ`` and a central difference of ``y``."""
        worst = 0.0
        for a, b in self.pieces():
            for t in np.linspace(a + 2 * h, b - 2 * h, checks):
                fd = (self.position(t + h) - self.position(t - h)) / (2 * h)
                worst = max(worst, float(np.max(np.abs(fd - self(t)[1]))))
        return worst

    def quadrature(self, integrand, nodes=16):
        """``∫_0^1 integrand(y, ẏ) dt`` with composite Gauss-Legendre per piece."""
        s, w = gauss_legendre_unit(nodes)
        total = 0.0
        for a, b in self.pieces():
            for si, wi in zip(s, w):
                t = a + (b - a) * si
                y, yd = self(t)
                total = total + (b - a) * wi * np.asarray(integrand(y, yd))
        return total


def concatenate(paths):
    """Concatenate paths with equal time shares, first path first."""
    k = len(paths)
    if k == 1:
        return paths[0]

    def locate(t):
        i = min(int(t * k), k - 1)
        return i, t * k - i

    def position(t):
        i, s = locate(t)
        return paths[i].position(s)

    def velocity(t):
        i, s = locate(t)
        return k * paths[i](s)[1]

    breaks = [i / k for i in range(1, k)]
    for i, p in enumerate(paths):
        breaks.extend((i + b) / k for b in p.breakpoints)
    return Path(position, velocity, breaks, label="∘".join(p.label for p in reversed(paths)))


def constant(point):
    point = np.asarray(point, dtype=float)
    return Path(lambda t: point, lambda t: np.zeros_like(point), label="constant")


def line(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return Path(lambda t: a + t * (b - a), lambda t: b - a, label="line")


def bezier(a, control, b):
    """Quadratic Bézier from ``a`` to ``b``; a bent alternative to :func:`line`."""
    a, c, b = (np.asarray(p, dtype=float) for p in (a, control, b))
    return Path(lambda t: (1 - t) ** 2 * a + 2 * t * (1 - t) * c + t ** 2 * b,
                lambda t: 2 * (1 - t) * (c - a) + 2 * t * (b - c), label="bezier")


def wiggle(a, b, amplitudes):
    """``a + t(b−a) + Σ_m c_m sin(mπt)`` with ``amplitudes[m−1] = c_m`` (vectors)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    amps = np.asarray(amplitudes, dtype=float)
    modes = np.arange(1, len(amps) + 1)

    def position(t):
        return a + t * (b - a) + np.sin(modes * np.pi * t) @ amps

    def velocity(t):
        return (b - a) + (modes * np.pi * np.cos(modes * np.pi * t)) @ amps

    return Path(position, velocity, label="wiggle")


def _plane_vector(dim, j, k, u, v):
    out = np.zeros(dim)
    out[j] = u
    out[k] = v
    return out


def circle_loop(base, center, j=0, k=1, turns=1.0):
    """Loop starting and ending at ``base`` around the circle through ``base``
    with the given centre in the ``(j, k)`` chart plane.  Counter-clockwise in
    ``(x^j, x^k)`` for positive ``turns``."""
    base = np.asarray(base, dtype=float)
    center = np.asarray(center, dtype=float)
    rel = base - center
    radius = np.hypot(rel[j], rel[k])
    theta0 = np.arctan2(rel[k], rel[j])
    omega = 2 * np.pi * turns
    dim = base.shape[0]

    def position(t):
        th = theta0 + omega * t
        return center + _plane_vector(dim, j, k, radius * np.cos(th), radius * np.sin(th))

    def velocity(t):
        th = theta0 + omega * t
        return _plane_vector(dim, j, k, -radius * omega * np.sin(th), radius * omega * np.cos(th))

    return Path(position, velocity, label="circle")


def _ease(s):
    return s ** 3 * (10 - 15 * s + 6 * s * s)


def _ease_prime(s):
    return 30 * s * s * (1 - s) ** 2


def eased_polygon(vertices):
    """Closed polygon through ``vertices`` with quintic easing on each edge, so
    the velocity vanishes (and is continuous) at the corners."""
    verts = [np.asarray(v, dtype=float) for v in vertices]
    edges = [line(p, q) for p, q in zip(verts, verts[1:] + verts[:1])]
    eased = [Path(lambda t, e=e: e.position(_ease(t)),
                  lambda t, e=e: e(_ease(t))[1] * _ease_prime(t), label="edge") for e in edges]
    loop = concatenate(eased)
    loop.label = "polygon"
    return loop


def square_loop(base, side, j=0, k=1, quadrant=(1, 1)):
    """Square with a corner at ``base`` in the ``(j, k)`` plane, traversed
    counter-clockwise in ``(x^j, x^k)``; ``quadrant`` picks the signs of the
    two edge directions leaving ``base``."""
    base = np.asarray(base, dtype=float)
    dim = base.shape[0]
    sj, sk = quadrant
    ej = _plane_vector(dim, j, k, sj * side, 0.0)
    ek = _plane_vector(dim, j, k, 0.0, sk * side)
    if sj * sk > 0:
        corners = [base, base + ej, base + ej + ek, base + ek]
    else:
        corners = [base, base + ek, base + ej + ek, base + ej]
    loop = eased_polygon(corners)
    loop.label = "square"
    return loop


def clover_loop(base, area, j=0, k=1):
    """Four counter-clockwise squares, one per quadrant around ``base``, with
    total coordinate area ``area``.  The union is centrally symmetric about the
    base point, so the loop is "centred" there."""
    side = np.sqrt(area / 4.0)
    quads = [(1, 1), (-1, 1), (-1, -1), (1, -1)]
    loop = concatenate([square_loop(base, side, j, k, q) for q in quads])
    loop.label = "clover"
    return loop


def plane_area(path, j=0, k=1, nodes=16):
    """Signed coordinate area ``½∮(x^j dx^k − x^k dx^j)`` (counter-clockwise
    positive in ``(x^j, x^k)``)."""
    return float(path.quadrature(lambda y, yd: 0.5 * (y[j] * yd[k] - y[k] * yd[j]), nodes))


def geodesic_arc(model, a, b):
    """Levi-Civita geodesic from ``a`` to ``b`` (needs ``model.log``)."""
    a = np.asarray(a, dtype=float)
    if hasattr(model, "log"):
        v = model.log(a, np.asarray(b, dtype=float))
        return Path(lambda t: model.geodesic(a, v, t)[0],
                    lambda t: model.geodesic(a, v, t)[1], label="geodesic")
    return line(a, b)

"""Generating phase of a path symplectomorphism.

For a path ``σ: σ' → σ''`` and a point ``x`` let ``x̃`` be the fixed point of
``s_x ∘ [σ]``.  The closed loop

    x̃ --c--> σ' --σ--> σ'' --[σ](c) reversed--> [σ](x̃) --Ether geodesic via x--> x̃

bounds a membrane whose symplectic area ``Φ(x)`` generates ``[σ]``:
``dΦ(x) = −H_x(x̃) = H_x([σ](x̃))``.  Areas use the orientation convention
``ω = ½ ω_jk dx^k ∧ dx^j`` (so the flat translation by ``a = (1, 0)`` gives
``dΦ = (0, −1)`` for ``ω_12 = 1``).

The membrane is the cone over the boundary polygon from the apex ``x``,
triangulated in rings and integrated with the 3-point edge-midpoint rule;
two mesh levels are combined by one Richardson step.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import paths as P
from .dynamics import path_symplectomorphism
from .numerics import DEFAULT_OPTIONS, FD_STEP_1, derivative, integrate, jacobian


class NewtonError(RuntimeError):
    """Damped Newton did not converge."""


def damped_newton(F, z0, tol=1e-12, max_iter=50, h=FD_STEP_1):
    """Solve ``F(z) = 0`` for a batch of independent problems.

    ``F`` maps ``(B, d) → (B, d)`` row-wise; the Jacobian is by central
    differences and steps are halved until the residual decreases.
    """
    z = np.array(z0, dtype=float)
    r = F(z)
    for _ in range(max_iter):
        norms = np.linalg.norm(r, axis=-1)
        if np.all(norms < tol):
            return z
        J = jacobian(F, z, h, richardson=False)
        step = np.linalg.solve(J, -r[..., None])[..., 0]
        lam = np.ones(z.shape[0])
        for _ in range(30):
            trial = z + lam[:, None] * step
            rt = F(trial)
            worse = np.linalg.norm(rt, axis=-1) > norms * (1 - 1e-4 * lam)
            worse &= norms >= tol
            if not np.any(worse):
                break
            lam = np.where(worse, lam / 2, lam)
        z, r = trial, rt
    norms = np.linalg.norm(r, axis=-1)
    if np.all(norms < 10 * tol):
        return z
    raise NewtonError(f"Newton did not converge (residual {norms.max():.2e})")


def fixed_point(field, sigma_map, x, tol=1e-12, max_iter=50):
    """``x̃`` with ``s_x([σ](x̃)) = x̃`` for a batch of ``x``.

    Starts from ``x``; falls back to the midpoint of the path's endpoints.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))

    def F(z):
        return field.reflect(x, sigma_map(z)) - z

    try:
        return damped_newton(F, x, tol, max_iter)
    except NewtonError:
        mid = 0.5 * (sigma_map.path.start + sigma_map.path.end)
        return damped_newton(F, np.broadcast_to(mid, x.shape), tol, max_iter)


def shoot_ether_geodesic(field, x, target, tol=1e-12, options=DEFAULT_OPTIONS):
    """``v`` with ``Exp_x(v) = target`` (batched), Newton from ``target − x``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    target = np.atleast_2d(np.asarray(target, dtype=float))

    def F(v):
        return _exp_batch(field, x, v, options) - target

    return damped_newton(F, target - x, tol)


def _exp_batch(field, x, v, options=DEFAULT_OPTIONS):
    """``Exp_{x_b}(v_b)`` for per-row base points; ``v`` may carry extra leading axes."""
    x = np.asarray(x, dtype=float)

    def rhs(_, E):
        return 0.5 * field.apply(x, E, v)

    return integrate(rhs, np.broadcast_to(x, np.shape(v)).copy(), 0.0, 1.0, options)


def auxiliary_path(kind, start, end, bend=0.25):
    """Path ``c`` from ``x̃`` to the start of ``σ``: ``line`` or ``bent``."""
    if kind == "line":
        return P.line(start, end)
    if kind == "bent":
        delta = end - start
        normal = np.zeros_like(delta)
        normal[0], normal[1] = -delta[1], delta[0]
        return P.bezier(start, 0.5 * (start + end) + bend * normal, end)
    raise ValueError(f"unknown auxiliary path {kind!r}")


def _sample_path(path, n):
    ts = np.concatenate([np.linspace(a, b, n + 1)[:-1] for a, b in path.pieces()] + [[1.0]])
    return np.array([path.position(t) for t in ts])


def membrane_boundary(field, sigma_map, x, xt, n, aux="line", options=DEFAULT_OPTIONS):
    """Closed boundary polygons (without repeated end point), shape ``(B, M, d)``."""
    x = np.atleast_2d(x)
    xt = np.atleast_2d(xt)
    B = x.shape[0]
    start = sigma_map.path.start
    c = np.stack([_sample_path(auxiliary_path(aux, xt[b], start), n) for b in range(B)])
    sig = _sample_path(sigma_map.path, n)
    moved = sigma_map(c)[:, ::-1]                        # [σ](c) from σ'' back to [σ](x̃)
    v = shoot_ether_geodesic(field, x, xt, options=options)
    taus = np.linspace(-1.0, 1.0, 2 * n + 1)
    geo = _exp_batch(field, x[None], taus[:, None, None] * v[None], options)   # (T, B, d)
    geo = np.moveaxis(geo, 0, 1)
    pieces = [c[:, :-1], np.broadcast_to(sig[:-1], (B,) + sig[:-1].shape), moved[:, :-1], geo[:, :-1]]
    return np.concatenate(pieces, axis=1)


def cone_area(model, boundary, apex, rings):
    """Symplectic area of the cone over closed polygons from ``apex``
    (counter-clockwise positive), 3-point edge-midpoint rule per triangle."""
    boundary = np.asarray(boundary, dtype=float)
    apex = np.asarray(apex, dtype=float)
    r = np.linspace(0.0, 1.0, rings + 1)
    nxt = np.roll(boundary, -1, axis=1)
    total = np.zeros(boundary.shape[0])
    for i in range(rings):
        r0, r1 = r[i], r[i + 1]
        a0 = apex[:, None] + r0 * (boundary - apex[:, None])
        b0 = apex[:, None] + r0 * (nxt - apex[:, None])
        a1 = apex[:, None] + r1 * (boundary - apex[:, None])
        b1 = apex[:, None] + r1 * (nxt - apex[:, None])
        for p, q, s in ((a0, a1, b1), (a0, b1, b0)):
            w = (model.omega(0.5 * (p + q)) + model.omega(0.5 * (q + s)) + model.omega(0.5 * (p + s))) / 3
            total += 0.5 * np.einsum("bmi,bmij,bmj->b", q - p, w, s - p)
    return total


def phase_raw(field, sigma_map, x, n, aux="line", options=DEFAULT_OPTIONS, xt=None):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if xt is None:
        xt = fixed_point(field, sigma_map, x)
    boundary = membrane_boundary(field, sigma_map, x, xt, n, aux, options)
    return -cone_area(field.model, boundary, x, n)


def phase_value(field, sigma_map, x, n, aux="line", options=DEFAULT_OPTIONS):
    """``Φ(x)`` from mesh levels ``n`` and ``n/2`` with one Richardson step
    (batched over leading axes of ``x``)."""
    x = np.asarray(x, dtype=float)
    batch = x.shape[:-1]
    flat = x.reshape(-1, x.shape[-1])
    xt = fixed_point(field, sigma_map, flat)
    fine = phase_raw(field, sigma_map, flat, n, aux, options, xt)
    coarse = phase_raw(field, sigma_map, flat, n // 2, aux, options, xt)
    return ((4 * fine - coarse) / 3).reshape(batch)


def converge_mesh(field, sigma_map, x, gate=1e-6, start=8, max_level=512, aux="line",
                  options=DEFAULT_OPTIONS):
    """Double the mesh until two successive extrapolated phases differ by less
    than ``gate``; returns ``(n, phase, change)``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = start
    prev = phase_value(field, sigma_map, x, n, aux, options)
    while True:
        n *= 2
        cur = phase_value(field, sigma_map, x, n, aux, options)
        change = float(np.max(np.abs(cur - prev)))
        if change < gate or n >= max_level:
            return n, cur, change
        prev = cur


@dataclass
class GeneratingPhase:
    x: np.ndarray
    fixed_point: np.ndarray
    image: np.ndarray
    phase: float
    dphase: np.ndarray
    target: np.ndarray
    mesh: int
    mesh_change: float

    @property
    def residual(self):
        """``‖dΦ(x) + H_x(x̃)‖_max``."""
        return float(np.max(np.abs(self.dphase - self.target)))


def phase_differential(field, sigma_map, x, n, aux="line", h=FD_STEP_1, options=DEFAULT_OPTIONS):
    """``dΦ(x)`` by central differences, all stencil points in one batch."""
    x = np.asarray(x, dtype=float)
    return derivative(lambda xx: phase_value(field, sigma_map, xx, n, aux, options), x, h)


def generating_phase(field, path, x, gate=1e-6, aux="line", h=FD_STEP_1, options=DEFAULT_OPTIONS):
    """Fixed point, phase, its differential and the target ``−H_x(x̃)``."""
    x = np.asarray(x, dtype=float)
    sigma = path_symplectomorphism(field, path, options)
    xt = fixed_point(field, sigma, x[None])[0]
    n, phi, change = converge_mesh(field, sigma, x[None], gate, aux=aux, options=options)
    dphi = phase_differential(field, sigma, x[None], n, aux, h, options)[:, 0]
    return GeneratingPhase(x, xt, sigma(xt), float(phi[0]), dphi, -field.value(x, xt), n, change)


def fixed_point_residual(field, path, x, options=DEFAULT_OPTIONS):
    sigma = path_symplectomorphism(field, path, options)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    xt = fixed_point(field, sigma, x)
    return float(np.max(np.abs(field.reflect(x, sigma(xt)) - xt)))


def extend_endpoint(path, offset):
    """``σ`` followed by the straight segment ``σ'' → σ'' + offset``."""
    end = path.end
    return P.concatenate([path, P.line(end, end + offset)])


def hamilton_jacobi_residual(field, path, x, n=None, h=1e-4, gate=1e-6, options=DEFAULT_OPTIONS):
    """``max_i |∂Φ/∂σ''_i + ½ H_{σ''}([σ](x̃))_i|`` with the endpoint varied by
    appending short straight segments; ``x`` is held fixed."""
    x = np.asarray(x, dtype=float)
    d = x.shape[0]
    sigma = path_symplectomorphism(field, path, options)
    if n is None:
        n, _, _ = converge_mesh(field, sigma, x[None], gate, options=options)

    def phi(offset):
        ext = extend_endpoint(path, offset)
        return phase_value(field, path_symplectomorphism(field, ext, options), x[None], n, options=options)[0]

    grad = np.zeros(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        coarse = (phi(h * e) - phi(-h * e)) / (2 * h)
        fine = (phi(0.5 * h * e) - phi(-0.5 * h * e)) / h
        grad[i] = (4 * fine - coarse) / 3
    xt = fixed_point(field, sigma, x[None])[0]
    target = -0.5 * field.value(path.end, sigma(xt))
    return float(np.max(np.abs(grad - target))), grad, target


def auxiliary_independence(field, path, xs, n=None, gate=1e-6, h=FD_STEP_1, options=DEFAULT_OPTIONS):
    """Compare two choices of the auxiliary path ``c``: spread of
    ``Φ_line − Φ_bent`` over ``xs`` and the largest gap between their ``dΦ``."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    sigma = path_symplectomorphism(field, path, options)
    if n is None:
        n, _, _ = converge_mesh(field, sigma, xs, gate, options=options)
    a = phase_value(field, sigma, xs, n, "line", options)
    b = phase_value(field, sigma, xs, n, "bent", options)
    spread = float(np.ptp(a - b))
    da = phase_differential(field, sigma, xs, n, "line", h, options)
    db = phase_differential(field, sigma, xs, n, "bent", h, options)
    return spread, float(np.max(np.abs(da - db)))

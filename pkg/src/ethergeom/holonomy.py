"""Dynamic holonomy of loops, its linearization, and Ether curvature functions.

A loop's symplectic path ``[σ]`` fixes the base point; its differential there
is the ordinary holonomy of the connection.  For small loops

    [σ]⁻¹(z) ≈ z + Σ_{j<k} σ_jk X_{R_jk}(z),    R_jk = ¼ {H_0k, H_0j},

where ``σ_jk`` is the loop's coordinate area in the ``(j, k)`` plane measured
with the orientation ``dx^k ∧ dx^j`` (minus the counter-clockwise area).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import paths as P
from .dynamics import PathMap, path_symplectomorphism
from .models import ConformalSurface, covariant_hessian, curvature_tensor, rotation_angle
from .numerics import DEFAULT_OPTIONS, FD_STEP_1, FD_STEP_2, gradient, slope_fit


def check_closed(loop, tol=1e-12):
    gap = float(np.max(np.abs(loop.end - loop.start)))
    if gap > tol:
        raise ValueError(f"path is not closed (gap {gap:.3e})")


def loop_areas(loop, nodes=16):
    """Antisymmetric matrix ``σ_jk`` of projected areas (``dx^k ∧ dx^j``)."""
    d = loop.start.shape[0]
    out = np.zeros((d, d))
    for j in range(d):
        for k in range(j + 1, d):
            a = P.plane_area(loop, j, k, nodes)
            out[j, k], out[k, j] = -a, a
    return out


def symplectic_area(model, loop, nodes=16):
    """``∫ω`` over the disc bounded by a planar loop on a 2-dimensional model,
    via the rotationally symmetric primitive of the area form."""
    if model.dim != 2:
        raise ValueError("symplectic_area is implemented for surfaces only")
    kappa = model.kappa if isinstance(model, ConformalSurface) else None

    def integrand(y, yd):
        twist = y[0] * yd[1] - y[1] * yd[0]
        if kappa is None:
            w = model.omega(y)[0, 1]
            return 0.5 * w * twist
        return 2.0 * twist / (1.0 + kappa * (y @ y))

    return float(loop.quadrature(integrand, nodes))


def dynamic_holonomy(field, loop, options=DEFAULT_OPTIONS):
    check_closed(loop)
    return path_symplectomorphism(field, loop, options)


def kinematic_holonomy(field, loop, options=DEFAULT_OPTIONS):
    """Differential of the dynamic holonomy at the base point."""
    _, jac = dynamic_holonomy(field, loop, options).differential(loop.start)
    return jac


def holonomy_angle(field, loop, options=DEFAULT_OPTIONS):
    """Rotation angle of the kinematic holonomy (surfaces)."""
    return rotation_angle(field.model, loop.start, kinematic_holonomy(field, loop, options))


def ether_curvature(field, basepoint, j, k, z):
    """``R_jk(z) = ¼ ∂_a H_{0k}(z) Ψ^{ab}(z) ∂_b H_{0j}(z)``, batched over ``z``."""
    z = np.asarray(z, dtype=float)
    G = field.grad_z(basepoint, z)
    psi = np.linalg.inv(field.model.omega(z))
    return 0.25 * np.einsum("...a,...ab,...b->...", G[..., k, :], psi, G[..., j, :])


def ether_curvature_field(field, basepoint, j, k, z, h=FD_STEP_1):
    """Hamiltonian vector field ``X_{R_jk}(z) = ∇R_jk Ψ``."""
    z = np.asarray(z, dtype=float)
    grad = gradient(lambda zz: ether_curvature(field, basepoint, j, k, zz), z, h)
    psi = np.linalg.inv(field.model.omega(z))
    return np.einsum("...a,...ab->...b", grad, psi)


@dataclass
class SlopeReport:
    areas: np.ndarray
    deltas: np.ndarray
    slope: float
    threshold: float = 1.5

    @property
    def passed(self):
        return bool(np.all(self.deltas < 1e-9)) or self.slope >= self.threshold


def small_loop_expansion_check(field, basepoint, j, k, areas, z, options=DEFAULT_OPTIONS):
    """``δ(ε) = ‖[σ_ε]⁻¹(z) − (z + Σ σ_jk X_{R_jk}(z))‖`` for clover loops of
    coordinate area ``ε`` centred on ``basepoint`` in the ``(j, k)`` plane.

    Returns the deltas and the log-log slope (``o(ε)`` means slope > 1).
    """
    basepoint = np.asarray(basepoint, dtype=float)
    z = np.asarray(z, dtype=float)
    d = basepoint.shape[0]
    fields = {(a, b): ether_curvature_field(field, basepoint, a, b, z)
              for a in range(d) for b in range(a + 1, d)}
    deltas = []
    for eps in areas:
        if eps == 0:
            deltas.append(0.0)
            continue
        loop = P.clover_loop(basepoint, eps, j, k)
        sig = loop_areas(loop)
        pred = z + sum(sig[a, b] * fields[a, b] for (a, b) in fields)
        back = dynamic_holonomy(field, loop, options).inverse(z)
        deltas.append(float(np.linalg.norm(back - pred)))
    deltas = np.array(deltas)
    positive = (np.asarray(areas) > 0) & (deltas > 0)
    slope = slope_fit(np.asarray(areas)[positive], deltas[positive]) if positive.sum() >= 2 else np.inf
    return SlopeReport(np.asarray(areas, dtype=float), deltas, slope)


def diagonal_curvature_check(field, basepoint, h=FD_STEP_2):
    """Residuals of the stationary-point identities of ``R_jk`` at the base
    point: value ``ω_jk``, vanishing gradient, covariant Hessian
    ``2 ω_ls R^s_mjk`` and ``sp``-membership of the curvature matrices.

    ``hessian_unit_factor`` compares against ``ω_ls R^s_mjk`` (no factor 2),
    which is what the numerics actually reproduce.
    """
    x = np.asarray(basepoint, dtype=float)
    model = field.model
    d = model.dim
    w = model.omega(x)
    R = curvature_tensor(model, x)
    value = grad = hess = half = sp = 0.0
    for j in range(d):
        for k in range(d):
            if j == k:
                continue

            def f(zz, j=j, k=k):
                return ether_curvature(field, x, j, k, zz)

            value = max(value, abs(float(f(x)) - w[j, k]))
            g = gradient(f, x, FD_STEP_1)
            grad = max(grad, float(np.max(np.abs(g))))
            H = covariant_hessian(model, f, x, h, grad=lambda _, g=g: g)
            target = 2 * np.einsum("ls,sm->lm", w, R[:, :, j, k])
            hess = max(hess, float(np.max(np.abs(H - target))))
            half = max(half, float(np.max(np.abs(H - 0.5 * target))))
            wr = w @ R[:, :, j, k]
            sp = max(sp, float(np.max(np.abs(wr.T - wr))))
    return {"value": value, "gradient": grad, "hessian": hess,
            "hessian_unit_factor": half, "sp_membership": sp}


def conjugacy_check(field, loop, path, z, options=DEFAULT_OPTIONS):
    """``‖[λ](z) − [σ]⁻¹([λ']([σ](z)))‖`` with ``λ' = σ ∘ λ ∘ σ⁻¹`` based at the
    end of ``path`` (which must start at the loop's base point)."""
    check_closed(loop)
    if not np.allclose(path.start, loop.start):
        raise ValueError("path must start at the loop base point")
    moved = P.concatenate([path.reversed(), loop, path])
    sigma = path_symplectomorphism(field, path, options)
    lam = dynamic_holonomy(field, loop, options)
    lam2 = PathMap(field, moved, True, options)
    z = np.asarray(z, dtype=float)
    return float(np.max(np.linalg.norm(lam(z) - sigma.inverse(lam2(sigma(z))), axis=-1)))


def ether_curvature_antisymmetry(field, basepoint, z):
    d = field.model.dim
    return max(float(np.max(np.abs(ether_curvature(field, basepoint, j, k, z)
                                   + ether_curvature(field, basepoint, k, j, z))))
               for j in range(d) for k in range(d))

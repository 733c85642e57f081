"""The intrinsic (Ether) Hamiltonian ``H_x(z)`` and the reflections it generates.

An Ether field is a 1-form in ``x`` with values in functions of ``z``.  Every
strategy exposes the same surface:

``value(x, z)``
    components ``H_x(z)_k``, shape ``(..., d)``
``grad_z(x, z)``
    ``∂H_x(z)_k / ∂z^m`` as ``out[..., k, m]``
``generator(x, z)``
    the internal vector field ``A_x(z)``: column ``k`` is the Hamiltonian
    vector field of ``H_x(·)_k``, ``A^n_k = ∂_m H_k Ψ^{mn}``
``apply(x, z, v)``
    ``A_x(z) v``, the velocity used by every path-driven ODE

All arguments broadcast over leading axes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import paths as P
from .models import curvature_tensor, gamma_derivative, poisson_tensor
from .numerics import (
    DEFAULT_OPTIONS,
    FD_STEP_1,
    DomainError,
    derivative,
    gauss_legendre_unit,
    hessian,
    integrate,
)


class EtherField:
    strategy = "abstract"

    def __init__(self, model):
        self.model = model

    def value(self, x, z):
        raise NotImplementedError

    def grad_z(self, x, z):
        raise NotImplementedError

    def generator(self, x, z):
        psi = np.linalg.inv(self.model.omega(z))
        return np.swapaxes(self.grad_z(x, z) @ psi, -1, -2)

    def apply(self, x, z, v):
        return np.einsum("...nk,...k->...n", self.generator(x, z), np.asarray(v, dtype=float))

    def reflect(self, x, z, options=DEFAULT_OPTIONS):
        """``s_x(z)``: closed form when the model has one, otherwise the ODE."""
        if self.model.has_reflections:
            return self.model.reflect(x, z)
        return reflection(self, x, z, options)

    def __repr__(self):
        return f"<{type(self).__name__} on {self.model.name}>"


class FlatEther(EtherField):
    """Exact solution on a flat model: ``H_x(z)_k = 2 ω_kj (z − x)^j``."""

    strategy = "closed-form"

    def __init__(self, model):
        super().__init__(model)
        origin = np.zeros(model.dim)
        self._omega = model.omega(origin)

    def value(self, x, z):
        delta = np.asarray(z, dtype=float) - np.asarray(x, dtype=float)
        return 2 * delta @ self._omega.T

    def grad_z(self, x, z):
        shape = np.broadcast_shapes(np.shape(x), np.shape(z))[:-1]
        return np.broadcast_to(2 * self._omega, shape + self._omega.shape).copy()

    def generator(self, x, z):
        shape = np.broadcast_shapes(np.shape(x), np.shape(z))[:-1]
        d = self.model.dim
        return np.broadcast_to(2 * np.eye(d), shape + (d, d)).copy()


def ether_flat(model):
    g = model.gamma(np.zeros(model.dim))
    w0 = model.omega(np.zeros(model.dim))
    probe = model.omega(np.full(model.dim, 0.37))
    if np.any(g != 0) or np.any(np.abs(probe - w0) > 0):
        raise ValueError(f"{model.name} is not flat; closed-form Ether field does not apply")
    return FlatEther(model)


class LineIntegralEther(EtherField):
    """Ether field reconstructed from a closed-form reflective structure.

    The generator is ``A_x(z) = (∂_x s_x)(s_x(z))``; its ``ω``-dual is a closed
    1-form in ``z`` whose primitive vanishing at ``z = x`` is ``H_x``:

        H_x(z)_k = ∫_x^z (∂s_x^j/∂x^k)(s_x(z')) ω_jm(z') dz'^m,

    evaluated by Gauss-Legendre quadrature along the chart segment.
    """

    strategy = "line-integral"

    def __init__(self, model, nodes=64):
        if not model.has_reflections:
            raise ValueError(f"{model.name} has no closed-form reflections")
        super().__init__(model)
        self.nodes = nodes
        self._s, self._w = gauss_legendre_unit(nodes)

    def generator(self, x, z):
        return self.model.reflect_dx(x, self.model.reflect(x, z))

    def grad_z(self, x, z):
        A = self.generator(x, z)
        # ∂_m H_k = A^j_k ω_jm
        return np.einsum("...jk,...jm->...km", A, self.model.omega(z))

    def value(self, x, z):
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        delta = z - x
        pts = x[None] + self._s.reshape((-1,) + (1,) * delta.ndim) * delta[None]
        g = self.grad_z(x[None], pts)
        integrand = np.einsum("n...km,...m->n...k", g, delta)
        return np.tensordot(self._w, integrand, axes=(0, 0))

    def value_along(self, path, nodes=None):
        """``∫_path dH`` for an arbitrary path from ``x = path.start``."""
        x = path.start
        return path.quadrature(lambda y, yd: self.grad_z(x, y) @ yd, nodes or self.nodes)


def ether_from_reflections(model, x, z, path=None, nodes=64):
    """Ether covector ``H_x(z)`` from a model's closed-form reflections.

    With ``path`` the quadrature runs along that path (it must start at ``x``
    and end at ``z``); otherwise along the chart segment.
    """
    f = LineIntegralEther(model, nodes)
    if path is None:
        return f.value(x, z)
    if not (np.allclose(path.start, x) and np.allclose(path.end, z)):
        raise ValueError("quadrature path must run from x to z")
    return f.value_along(path, nodes=nodes)


@dataclass
class JetCoefficients:
    """Jet of ``H_x(z)_k`` at ``z = x``.

    ``covariant[n]`` are covariant derivatives of order ``n`` on the diagonal:
    0, ``2ω``, 0 and ``∇_j∇_l∇_s H_k = 2 ω_sm R^m_lkj`` (stored as
    ``[k, j, l, s]``).  ``taylor[n]`` are the ordinary coordinate Taylor
    tensors (``[k, i1, ..., in]``, symmetric in the ``i``'s) used to evaluate
    the truncated series.
    """

    base: np.ndarray
    order: int
    covariant: list = field(default_factory=list)
    taylor: list = field(default_factory=list)


def _jet_tensors(model, x, order):
    x = np.asarray(x, dtype=float)
    d = model.dim
    w = model.omega(x)
    g = model.gamma(x)
    batch = x.shape[:-1]
    cov = [np.zeros(batch + (d,)), 2 * w, np.zeros(batch + (d,) * 3)]
    tay = [np.zeros(batch + (d,)), 2 * w,
           2 * np.einsum("...kr,...rml->...kml", w, g)]
    if order >= 3:
        R = curvature_tensor(model, x)
        dg = gamma_derivative(model, x)
        c3 = 2 * np.einsum("...sm,...mlkj->...kjls", w, R)
        extra = (2 * np.einsum("...kr,...jrls->...kjls", w, dg)
                 + 2 * np.einsum("...rls,...kq,...qjr->...kjls", g, w, g))
        raw = c3 + extra
        sym = sum(np.transpose(raw, tuple(range(raw.ndim - 4)) + tuple(len(batch) + np.array(p)))
                  for p in ((0, 1, 2, 3), (0, 1, 3, 2), (0, 2, 1, 3),
                            (0, 2, 3, 1), (0, 3, 1, 2), (0, 3, 2, 1))) / 6
        cov.append(c3)
        tay.append(sym)
    return cov[: order + 1], tay[: order + 1]


def jet_expand(model, x, order=3):
    """Covariant jet of the Ether Hamiltonian at ``x`` up to ``order ≤ 3``."""
    if order > 3:
        raise ValueError("jet orders above 3 are not supported")
    if order < 0:
        raise ValueError("order must be non-negative")
    cov, tay = _jet_tensors(model, x, order)
    return JetCoefficients(np.asarray(x, dtype=float), order, cov, tay)


class JetEther(EtherField):
    """Truncated coordinate Taylor series of ``H_x(z)`` about the diagonal.

    Valid only for ``‖z − x‖ < radius``; larger separations raise
    :class:`DomainError`.
    """

    strategy = "jet"

    def __init__(self, model, order=3, radius=0.2):
        if order > 3:
            raise ValueError("jet orders above 3 are not supported")
        super().__init__(model)
        self.order = order
        self.radius = radius

    def _delta(self, x, z):
        x = np.asarray(x, dtype=float)
        delta = np.asarray(z, dtype=float) - x
        if np.any(np.linalg.norm(delta, axis=-1) > self.radius):
            raise DomainError(f"jet field used beyond radius {self.radius}")
        x = np.broadcast_to(x, delta.shape)
        return x, delta

    def value(self, x, z):
        x, delta = self._delta(x, z)
        _, tay = _jet_tensors(self.model, x, self.order)
        out = np.einsum("...km,...m->...k", tay[1], delta)
        if self.order >= 2:
            out = out + 0.5 * np.einsum("...kml,...m,...l->...k", tay[2], delta, delta)
        if self.order >= 3:
            out = out + np.einsum("...kjls,...j,...l,...s->...k", tay[3], delta, delta, delta) / 6
        return out

    def grad_z(self, x, z):
        x, delta = self._delta(x, z)
        _, tay = _jet_tensors(self.model, x, self.order)
        out = tay[1].copy()
        if self.order >= 2:
            out = out + np.einsum("...kml,...l->...km", tay[2], delta)
        if self.order >= 3:
            out = out + 0.5 * np.einsum("...kmls,...l,...s->...km", tay[3], delta, delta)
        return out


def make_ether(model, strategy="auto", nodes=64, jet_order=3, jet_radius=0.2):
    """Pick the construction: closed form on flat models, line integral when
    reflections are known in closed form, truncated jet otherwise."""
    if strategy == "auto":
        if model.name.startswith("flat"):
            strategy = "closed-form"
        elif model.has_reflections:
            strategy = "line-integral"
        else:
            strategy = "jet"
    if strategy == "closed-form":
        return ether_flat(model)
    if strategy == "line-integral":
        return LineIntegralEther(model, nodes)
    if strategy == "jet":
        return JetEther(model, jet_order, jet_radius)
    raise ValueError(f"unknown Ether strategy {strategy!r}")


# -- operations --------------------------------------------------------------

def reflection(field, x, z, options=DEFAULT_OPTIONS):
    """``s_x(z)`` by integrating ``∂s = ∇H(s)Ψ(s)`` along the chart segment from
    ``z`` to ``x`` (the "time" variable), starting from ``s = z``."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    x, z = np.broadcast_arrays(x, z)
    field.model.check_domain(x)
    field.model.check_domain(z)
    step = x - z

    def rhs(t, s):
        return field.apply(z + t * step, s, step)

    out = integrate(rhs, z, 0.0, 1.0, options)
    field.model.check_domain(out)
    return out


def connection_from_reflections(reflect, x, h=1e-3):
    """``Γ^j_kl(x) = −½ ∂²s_x^j/∂z^k∂z^l`` at ``z = x`` (central differences)."""
    x = np.asarray(x, dtype=float)
    return -0.5 * hessian(lambda zz: reflect(x, zz), x, h)


def zero_curvature_residual(field, x, z, u, v, h=FD_STEP_1):
    """``|(∂H + ½{H∧H})(u, v)|``: ``x``-derivatives by central differences,
    the bracket in ``z`` through ``grad_z`` and ``Ψ(z)``."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    dH = derivative(lambda xx: field.value(xx, z), x, h)       # [i, j] = ∂_i H_j
    G = field.grad_z(x, z)
    psi = poisson_tensor(field.model, z)
    bracket = G @ psi @ G.T                                  # {H_i, H_j}
    form = dH - dH.T + bracket
    return float(abs(u @ form @ v))


def boundary_residuals(field, x, h=1e-3):
    """Residuals of the diagonal conditions ``H|=0, ∇H|=2ω, ∇∇H|=0`` at ``x``."""
    x = np.asarray(x, dtype=float)
    model = field.model
    value = float(np.max(np.abs(field.value(x, x))))
    grad = float(np.max(np.abs(field.grad_z(x, x) - 2 * model.omega(x))))
    # covariant Hessian in z of each component H_k
    d2 = hessian(lambda zz: field.value(x, zz), x, h)          # [k, m, l]
    cov = d2 - np.einsum("kr,rml->kml", field.grad_z(x, x), model.gamma(x))
    return {"value": value, "gradient": grad, "second": float(np.max(np.abs(cov)))}


def skew_symmetry_residual(field, x, z):
    """``‖H_x(s_x(z)) + H_x(z)‖``."""
    s = field.reflect(x, z)
    return float(np.max(np.abs(field.value(x, s) + field.value(x, z))))


def path_independence_gap(field, x, z, bend=0.3):
    """Gap between line integrals of ``dH`` along the segment and along a bent
    quadratic path with the same endpoints."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    delta = z - x
    normal = np.zeros_like(delta)
    normal[0], normal[1] = -delta[1], delta[0]
    bent = P.bezier(x, 0.5 * (x + z) + bend * normal, z)
    f = field if isinstance(field, LineIntegralEther) else LineIntegralEther(field.model)
    return float(np.max(np.abs(f.value_along(P.line(x, z)) - f.value_along(bent))))

"""Chart-based manifold models with a symplectic form and an affine connection.

Index conventions used throughout the package:

* ``omega(x)[..., j, k] = ω_jk``, ``Ψ = ω⁻¹``.
* ``gamma(x)[..., l, j, k] = Γ^l_jk``.  For torsion-carrying connections the
  *last* lower index is the differentiation direction,
  ``(∇_k u)^l = ∂_k u^l + Γ^l_jk u^j``.
* ``curvature[..., s, m, j, k] = R^s_mjk`` with
  ``R^s_mjk = ∂_j Γ^s_km − ∂_k Γ^s_jm + Γ^s_jl Γ^l_km − Γ^s_kl Γ^l_jm``,
  so that on the unit sphere ``R^1_212 = 1`` in an orthonormal frame.
* Covectors act on vectors from the left: a Hamiltonian vector field is the
  row vector ``∇f · Ψ``.

Built-in models: ``flat-r2n`` (any even dimension), ``sphere-s2`` in a single
stereographic chart and ``hyperbolic-h2`` in the Poincaré disk.  Both curved
models carry their geodesic symmetries in closed form (Möbius maps), which the
Ether-field constructions rely on.
"""
from __future__ import annotations

import numpy as np

from .numerics import (
    DEFAULT_OPTIONS,
    FD_STEP_1,
    FD_STEP_2,
    DomainError,
    derivative,
    hessian,
    integrate,
)


class SingularFormError(ValueError):
    """The symplectic form is numerically singular at the requested point."""


class ModelDefinitionError(ValueError):
    """Closed-form data of a model disagrees with its own derived quantities."""


class ManifoldModel:
    """Base class.  Subclasses provide ``omega`` and ``gamma``; everything else
    has a finite-difference fallback."""

    name = "abstract"
    dim = 2
    symplectic = True
    torsion_free = True
    cap = np.inf

    # -- geometry ---------------------------------------------------------
    def in_domain(self, x):
        x = np.asarray(x, dtype=float)
        return np.linalg.norm(x, axis=-1) < self.cap

    def check_domain(self, x):
        x = np.asarray(x, dtype=float)
        inside = self.in_domain(x)
        if not np.all(inside):
            bad = x[~inside] if x.ndim > 1 else x
            raise DomainError(f"{self.name}: point(s) outside chart domain: {np.atleast_2d(bad)[0]}")

    def omega(self, x):
        raise NotImplementedError

    def gamma(self, x):
        raise NotImplementedError

    def curvature_closed_form(self, x):
        return None

    # -- optional reflective structure -------------------------------------
    has_reflections = False

    def reflect(self, x, z):
        raise NotImplementedError(f"{self.name} has no closed-form reflections")

    def reflect_dx(self, x, z):
        """``out[..., j, k] = ∂ s_x(z)^j / ∂ x^k``."""
        x = np.asarray(x, dtype=float)
        return np.moveaxis(derivative(lambda xx: self.reflect(xx, z), x), 0, -1)

    def reflect_dz(self, x, z):
        z = np.asarray(z, dtype=float)
        return np.moveaxis(derivative(lambda zz: self.reflect(x, zz), z), 0, -1)

    def geodesic_exp(self, x, v, t=1.0):
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} dim={self.dim}>"


def standard_omega(n):
    """Darboux form on R^{2n}: ``[[0, I], [-I, 0]]``."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


class FlatModel(ManifoldModel):
    """R^{2n} with the Darboux form and the trivial connection."""

    has_reflections = True

    def __init__(self, n=1, omega=None, cap=np.inf):
        self.n = n
        self.dim = 2 * n
        self.name = f"flat-r{2 * n}"
        self.cap = cap
        self._omega = standard_omega(n) if omega is None else np.asarray(omega, dtype=float)

    def omega(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self._omega, x.shape[:-1] + self._omega.shape).copy()

    def gamma(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (self.dim,) * 3)

    def curvature_closed_form(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (self.dim,) * 4)

    def reflect(self, x, z):
        return 2 * np.asarray(x, dtype=float) - np.asarray(z, dtype=float)

    def reflect_dx(self, x, z):
        shape = np.broadcast_shapes(np.shape(x), np.shape(z))[:-1]
        return np.broadcast_to(2 * np.eye(self.dim), shape + (self.dim, self.dim)).copy()

    def reflect_dz(self, x, z):
        shape = np.broadcast_shapes(np.shape(x), np.shape(z))[:-1]
        return np.broadcast_to(-np.eye(self.dim), shape + (self.dim, self.dim)).copy()

    def geodesic_exp(self, x, v, t=1.0):
        return np.asarray(x, dtype=float) + t * np.asarray(v, dtype=float)


def _c(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0] + 1j * x[..., 1]


def _r(w):
    return np.stack([w.real, w.imag], axis=-1)


def _holo_jac(dw):
    """Real 2x2 Jacobian of a holomorphic map with complex derivative ``dw``."""
    return np.stack([np.stack([dw.real, -dw.imag], -1),
                     np.stack([dw.imag, dw.real], -1)], -2)


class ConformalSurface(ManifoldModel):
    """Constant-curvature surface ``4|dx|²/(1 + κ|x|²)²`` with its area form.

    ``κ = +1`` is the unit sphere in a stereographic chart centred at the north
    pole, ``κ = -1`` the Poincaré disk.  The Levi-Civita connection of a
    surface is symplectic for the area form, so ``(ω, Γ)`` is a torsion-free
    symplectic pair.  Geodesic symmetries are the Möbius maps

        s_p(z) = (2p - (1 - κ|p|²) z) / (1 - κ|p|² + 2κ p̄ z).
    """

    has_reflections = True
    dim = 2

    def __init__(self, kappa, cap, name):
        self.kappa = float(kappa)
        self.cap = float(cap)
        self.name = name

    def conformal_factor(self, x):
        x = np.asarray(x, dtype=float)
        q = np.sum(x * x, axis=-1)
        return 4.0 / (1.0 + self.kappa * q) ** 2

    def metric(self, x):
        lam = self.conformal_factor(x)
        return lam[..., None, None] * np.eye(2)

    def omega(self, x):
        lam = self.conformal_factor(x)
        return lam[..., None, None] * np.array([[0.0, 1.0], [-1.0, 0.0]])

    def gamma(self, x):
        x = np.asarray(x, dtype=float)
        q = np.sum(x * x, axis=-1)
        dphi = -2.0 * self.kappa * x / (1.0 + self.kappa * q)[..., None]
        eye = np.eye(2)
        # Γ^k_ij = δ^k_i φ_j + δ^k_j φ_i - δ_ij φ_k
        return (np.einsum("ki,...j->...kij", eye, dphi)
                + np.einsum("kj,...i->...kij", eye, dphi)
                - np.einsum("ij,...k->...kij", eye, dphi))

    def curvature_closed_form(self, x):
        g = self.metric(x)
        eye = np.eye(2)
        return self.kappa * (np.einsum("sj,...mk->...smjk", eye, g)
                             - np.einsum("sk,...mj->...smjk", eye, g))

    def _mobius_parts(self, p, w):
        k = self.kappa
        pp = (p * np.conj(p)).real
        num = 2 * p - (1 - k * pp) * w
        den = 1 - k * pp + 2 * k * np.conj(p) * w
        return num, den

    def reflect(self, x, z):
        p, w = _c(x), _c(z)
        num, den = self._mobius_parts(p, w)
        return _r(num / den)

    def reflect_dz(self, x, z):
        k = self.kappa
        p, w = _c(x), _c(z)
        num, den = self._mobius_parts(p, w)
        pp = (p * np.conj(p)).real
        ds = (-(1 - k * pp) * den - num * 2 * k * np.conj(p)) / den ** 2
        return _holo_jac(ds)

    def reflect_dx(self, x, z):
        k = self.kappa
        p, w = _c(x), _c(z)
        pb = np.conj(p)
        num, den = self._mobius_parts(p, w)
        n_p, n_pb = 2 + k * pb * w, k * p * w
        d_p, d_pb = -k * pb, -k * p + 2 * k * w
        s_p = (n_p * den - num * d_p) / den ** 2
        s_pb = (n_pb * den - num * d_pb) / den ** 2
        col1 = s_p + s_pb
        col2 = 1j * (s_p - s_pb)
        return np.stack([np.stack([col1.real, col2.real], -1),
                         np.stack([col1.imag, col2.imag], -1)], -2)

    def _to_center(self, p, w):
        return (w - p) / (1 + self.kappa * np.conj(p) * w)

    def _from_center(self, p, w):
        return (w + p) / (1 - self.kappa * np.conj(p) * w)

    def _radial(self, s):
        return np.tan(s / 2) if self.kappa > 0 else np.tanh(s / 2)

    def _radial_prime(self, s):
        return 0.5 / np.cos(s / 2) ** 2 if self.kappa > 0 else 0.5 / np.cosh(s / 2) ** 2

    def geodesic_exp(self, x, v, t=1.0):
        """Levi-Civita exponential via the isometry moving ``x`` to the centre."""
        pos, _ = self.geodesic(x, v, t)
        return pos

    def geodesic(self, x, v, t):
        """Point and velocity of the geodesic ``τ ↦ exp_x(τ v)`` at ``τ = t``."""
        p, u = _c(x), _c(v)
        pp = abs(p) ** 2
        u0 = u / (1 + self.kappa * pp)      # T_p'(p) = 1/(1 + κ|p|²)
        speed = 2 * abs(u0)                 # metric length at the centre
        if speed == 0:
            return np.array(x, dtype=float), np.zeros(2)
        direction = u0 / abs(u0)
        w = self._radial(speed * t) * direction
        dw = self._radial_prime(speed * t) * speed * direction
        inv_prime = (1 + self.kappa * pp) / (1 - self.kappa * np.conj(p) * w) ** 2
        return _r(np.asarray(self._from_center(p, w))), _r(np.asarray(inv_prime * dw))

    def log(self, x, y):
        """Inverse of ``geodesic_exp`` on the chart."""
        p = _c(x)
        w = self._to_center(p, _c(y))
        r = abs(w)
        if r == 0:
            return np.zeros(2)
        s = 2 * (np.arctan(r) if self.kappa > 0 else np.arctanh(r))
        u0 = (s / 2) * w / r
        return _r(np.asarray(u0 * (1 + self.kappa * abs(p) ** 2)))


def sphere_s2(cap=2.0):
    return ConformalSurface(1.0, cap, "sphere-s2")


def hyperbolic_h2(cap=0.9):
    return ConformalSurface(-1.0, cap, "hyperbolic-h2")


def flat_r2n(n=1):
    return FlatModel(n)


MODELS = {
    "flat-r2": lambda **kw: FlatModel(1, **kw),
    "flat-r4": lambda **kw: FlatModel(2, **kw),
    "flat-r2n": lambda n=1, **kw: FlatModel(int(n), **kw),
    "sphere-s2": lambda cap=2.0: sphere_s2(float(cap)),
    "hyperbolic-h2": lambda cap=0.9: hyperbolic_h2(float(cap)),
}


def get_model(name, **params):
    try:
        factory = MODELS[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
    return factory(**params)


# -- operations -------------------------------------------------------------

def poisson_tensor(model, x, max_condition=1e12):
    """``Ψ = ω⁻¹`` at ``x``; raises :class:`SingularFormError` on ill-conditioning."""
    w = model.omega(x)
    cond = np.linalg.cond(w)
    if np.any(~np.isfinite(cond)) or np.any(cond > max_condition):
        raise SingularFormError(f"{model.name}: symplectic form singular at {x}")
    return np.linalg.inv(w)


def _curvature_from_gamma(gamma, dgamma):
    # dgamma[..., a, l, j, k] = ∂_a Γ^l_jk
    term1 = np.einsum("...jskm->...smjk", dgamma)
    term2 = np.einsum("...ksjm->...smjk", dgamma)
    quad1 = np.einsum("...sjl,...lkm->...smjk", gamma, gamma)
    quad2 = np.einsum("...skl,...ljm->...smjk", gamma, gamma)
    return term1 - term2 + quad1 - quad2


def gamma_derivative(model, x, h=FD_STEP_2):
    """``out[..., a, l, j, k] = ∂_a Γ^l_jk`` by central differences."""
    x = np.asarray(x, dtype=float)
    return np.moveaxis(derivative(model.gamma, x, h), 0, -4)


def curvature_tensor(model, x, source="auto"):
    """Riemann tensor ``R^s_mjk`` at ``x`` (see module docstring).

    ``source`` is ``"closed"``, ``"fd"`` or ``"auto"`` (closed form when the
    model has one).
    """
    x = np.asarray(x, dtype=float)
    if source in ("auto", "closed"):
        closed = model.curvature_closed_form(x)
        if closed is not None:
            return closed
        if source == "closed":
            raise ValueError(f"{model.name} has no closed-form curvature")
    return _curvature_from_gamma(model.gamma(x), gamma_derivative(model, x))


def validate_curvature(model, x, tol=1e-6):
    """Compare closed-form and finite-difference curvature; raise on mismatch."""
    closed = model.curvature_closed_form(x)
    if closed is None:
        return 0.0
    gap = float(np.max(np.abs(closed - curvature_tensor(model, x, source="fd"))))
    if gap > tol:
        raise ModelDefinitionError(f"{model.name}: curvature mismatch {gap:.2e} at {x}")
    return gap


def covariant_hessian(model, f, x, h=FD_STEP_2, grad=None, hess=None):
    """``∇²_jk f = D²_jk f − D_m f Γ^m_jk`` at a single point ``x``.

    ``grad``/``hess`` may supply closed-form first and second derivatives;
    otherwise both come from central differences.
    """
    x = np.asarray(x, dtype=float)
    g = grad(x) if grad is not None else np.moveaxis(derivative(f, x, FD_STEP_1), 0, -1)
    d2 = hess(x) if hess is not None else hessian(f, x, h)
    return d2 - np.einsum("...m,...mjk->...jk", g, model.gamma(x))


def omega_covariant_derivative(model, x, h=FD_STEP_1):
    """``(∇_k ω)_ij = ∂_k ω_ij − Γ^l_ik ω_lj − Γ^l_jk ω_il``; shape ``(k, i, j)``."""
    x = np.asarray(x, dtype=float)
    dw = derivative(model.omega, x, h)
    w = model.omega(x)
    g = model.gamma(x)
    return dw - np.einsum("lik,lj->kij", g, w) - np.einsum("ljk,il->kij", g, w)


def transport_rhs(model, y, ydot, V):
    """Right-hand side of ``dV/dt = −ẏ^j Γ(y)_j V`` for a batch of frames."""
    g = model.gamma(y)
    return -np.einsum("lkj,j,k...->l...", g, ydot, V)


def parallel_transport(model, path, options=DEFAULT_OPTIONS, frame=None):
    """Parallel translation ``V¹`` along ``path`` (``V⁰ = frame`` or identity)."""
    d = model.dim
    V0 = np.eye(d) if frame is None else np.asarray(frame, dtype=float)

    def rhs(t, V):
        y, ydot = path(t)
        return transport_rhs(model, y, ydot, V)

    return integrate(rhs, V0, 0.0, 1.0, options, breakpoints=path.breakpoints)


def symplectic_defect(model, jac, z, image):
    """``‖Dφᵀ ω(φ(z)) Dφ − ω(z)‖_max`` for a batch of Jacobians."""
    lhs = np.einsum("...ai,...ab,...bj->...ij", jac, model.omega(image), jac)
    return float(np.max(np.abs(lhs - model.omega(z))))


def rotation_angle(model, x, M):
    """Rotation angle of a linear map of ``T_x`` for a 2-D conformal model."""
    M = np.asarray(M, dtype=float)
    return float(np.arctan2(M[1, 0] - M[0, 1], M[0, 0] + M[1, 1]))


def sample_points(model, rng, count, radius=None):
    """Uniform samples in the ball of ``radius`` (default: half the chart cap)."""
    if radius is None:
        radius = 1.0 if not np.isfinite(model.cap) else 0.5 * model.cap
    d = model.dim
    dirs = rng.normal(size=(count, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = radius * rng.uniform(size=(count, 1)) ** (1.0 / d)
    return dirs * radii

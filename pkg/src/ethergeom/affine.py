"""Internal vector fields and inversive structures on general affine manifolds.

An *inversive structure* is a family of diffeomorphisms ``s_x`` with isolated
fixed points ``s_x(x) = x``.  It generates an *internal vector field*

    A_x(z) = (∂_x s_x)(s_x⁻¹(z)),       (column j: the x^j-derivative),

which solves ``∂A + ½[A∧A] = 0`` (vector-field bracket in ``z``), a connection

    Γ^l_jk(x) = −∂²s^l/∂z^m∂x^r · [∂_z s]⁻¹{}^m_k · [∂_x s]⁻¹{}^r_j  at z = x,

and the Cartan field ``a(x) = ∂_x s_x(z)|_{z=x}``.  Conversely the inversions
are trajectories ``∂s = A(s)`` started at ``s|_{x=z} = z``.

Involutive structures (``s_x² = id``) give *fundamental* fields with
``a = 2·I`` and torsion-free ``Γ``; non-involutive ones come in pairs
``A⁺, A⁻ = −(Ds⁺)⁻¹ A⁺(s⁺)`` whose inversions are mutually inverse.

Index layout follows the rest of the package: ``gamma[l, j, k] = Γ^l_jk`` with
the last lower index the differentiation direction.  In that layout the
contraction above lands transposed (its ``k`` slot is the direction), and the
torsion entering the brackets below is ``T^k_sl = Γ^k_ls − Γ^k_sl``.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from . import paths as P
from .dynamics import FlowSegment, PathMap
from .numerics import (
    DEFAULT_OPTIONS,
    FD_STEP_1,
    FD_STEP_2,
    derivative,
    gauss_legendre_unit,
    integrate,
    jacobian,
)


def _rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


# -- inversive structures ------------------------------------------------------

class InversiveStructure:
    """Family ``s_x`` with derivatives and inverse; subclasses override the
    closed forms they know, everything else falls back to differences/Newton."""

    involutive = False
    name = "inversive"

    def __init__(self, dim, omega=None):
        self.dim = dim
        self._omega = omega

    @property
    def symplectic(self):
        return self._omega is not None

    def omega(self, z):
        if self._omega is None:
            raise ValueError(f"{self.name} carries no symplectic form")
        return self._omega(z)

    def s(self, x, z):
        raise NotImplementedError

    def ds_dx(self, x, z):
        """``∂s^l/∂x^j`` as ``[..., l, j]``."""
        x, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(z, float))
        return jacobian(lambda xx: self.s(xx, z), x)

    def ds_dz(self, x, z):
        """``∂s^l/∂z^m`` as ``[..., l, m]``."""
        x, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(z, float))
        return jacobian(lambda zz: self.s(x, zz), z)

    def inverse(self, x, z, tol=1e-13, max_iter=40):
        """``s_x⁻¹(z)`` by Newton."""
        x, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(z, float))
        w = z.copy()
        for _ in range(max_iter):
            r = self.s(x, w) - z
            if np.max(np.abs(r)) < tol:
                break
            w = w - np.linalg.solve(self.ds_dz(x, w), r[..., None])[..., 0]
        return w

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} d={self.dim}>"


class LinearFamily(InversiveStructure):
    """``s_x(z) = x + M(z − x)`` with a constant matrix ``M``."""

    name = "linear"

    def __init__(self, M=None, omega=None):
        M = np.array([[0.0, -1.0], [1.0, 0.0]]) if M is None else np.asarray(M, dtype=float)
        super().__init__(M.shape[0], omega)
        self.M = M
        self.Minv = np.linalg.inv(M)
        self.involutive = bool(np.allclose(M @ M, np.eye(self.dim)))

    def s(self, x, z):
        x = np.asarray(x, float)
        return x + (np.asarray(z, float) - x) @ self.M.T

    def ds_dx(self, x, z):
        shape = np.broadcast_shapes(np.shape(x), np.shape(z))[:-1]
        return np.broadcast_to(np.eye(self.dim) - self.M, shape + self.M.shape).copy()

    def ds_dz(self, x, z):
        shape = np.broadcast_shapes(np.shape(x), np.shape(z))[:-1]
        return np.broadcast_to(self.M, shape + self.M.shape).copy()

    def inverse(self, x, z, **_):
        x = np.asarray(x, float)
        return x + (np.asarray(z, float) - x) @ self.Minv.T


class TwistedFamily(InversiveStructure):
    """``s_x(z) = x + M(x)(z − x)`` with ``M(x)`` rotating each Darboux pair
    ``(q_i, p_i)`` by ``π/2 + ⟨b_i, x⟩``.

    Each ``s_x`` is a linear symplectomorphism for the standard form, but the
    ``x``-dependence of ``M`` gives a connection with torsion and a
    non-constant Cartan field.
    """

    name = "twisted"

    def __init__(self, rates):
        rates = np.atleast_2d(np.asarray(rates, dtype=float))
        n, dim = rates.shape
        if dim != 2 * n:
            raise ValueError("rates must have shape (n, 2n)")
        from .models import standard_omega
        w = standard_omega(n)
        super().__init__(dim, lambda z: np.broadcast_to(w, np.shape(z)[:-1] + w.shape).copy())
        self.rates = rates
        self.n = n
        self._pairs = [np.array([i, n + i]) for i in range(n)]   # Darboux pairs (q_i, p_i)

    def _angles(self, x):
        return np.pi / 2 + np.asarray(x, float) @ self.rates.T

    def matrix(self, x):
        th = self._angles(x)
        out = np.zeros(th.shape[:-1] + (self.dim, self.dim))
        for i, ix in enumerate(self._pairs):
            out[..., ix[:, None], ix[None, :]] = _rotation(th[..., i])
        return out

    def matrix_derivative(self, x):
        """``∂M/∂x^j`` as ``[..., l, m, j]``."""
        th = self._angles(x)
        out = np.zeros(th.shape[:-1] + (self.dim, self.dim, self.dim))
        for i, ix in enumerate(self._pairs):
            blk = _rotation(th[..., i] + np.pi / 2)      # d/dθ R(θ) = R(θ + π/2)
            out[..., ix[:, None], ix[None, :], :] = blk[..., None] * self.rates[i]
        return out

    def s(self, x, z):
        x = np.asarray(x, float)
        return x + np.einsum("...lm,...m->...l", self.matrix(x), np.asarray(z, float) - x)

    def ds_dx(self, x, z):
        x = np.asarray(x, float)
        delta = np.asarray(z, float) - x
        M = self.matrix(x)
        dM = self.matrix_derivative(x)
        return np.eye(self.dim) - M + np.einsum("...lmj,...m->...lj", dM, delta)

    def ds_dz(self, x, z):
        shape = np.broadcast_shapes(np.shape(x), np.shape(z))
        return np.broadcast_to(self.matrix(x), shape[:-1] + (self.dim, self.dim)).copy()

    def inverse(self, x, z, **_):
        x = np.asarray(x, float)
        return x + np.einsum("...ml,...m->...l", self.matrix(x), np.asarray(z, float) - x)


class ReflectionFamily(InversiveStructure):
    """Closed-form geodesic symmetries of a model (involutive)."""

    involutive = True

    def __init__(self, model):
        super().__init__(model.dim, model.omega)
        self.model = model
        self.name = f"reflections-{model.name}"

    def s(self, x, z):
        return self.model.reflect(x, z)

    def ds_dx(self, x, z):
        return self.model.reflect_dx(x, z)

    def ds_dz(self, x, z):
        return self.model.reflect_dz(x, z)

    def inverse(self, x, z, **_):
        return self.model.reflect(x, z)


class InverseFamily(InversiveStructure):
    """``s⁻_x = (s⁺_x)⁻¹`` with derivatives from the inverse function theorem."""

    def __init__(self, base):
        super().__init__(base.dim, base._omega)
        self.base = base
        self.involutive = base.involutive
        self.name = f"inverse-{base.name}"

    def s(self, x, z):
        return self.base.inverse(x, z)

    def ds_dz(self, x, z):
        return np.linalg.inv(self.base.ds_dz(x, self.s(x, z)))

    def ds_dx(self, x, z):
        w = self.s(x, z)
        return -np.linalg.solve(self.base.ds_dz(x, w), self.base.ds_dx(x, w))

    def inverse(self, x, z, **_):
        return self.base.s(x, z)


class FieldInversions(InversiveStructure):
    """Inversions generated by an internal vector field through ``∂s = A(s)``."""

    def __init__(self, field, options=DEFAULT_OPTIONS):
        super().__init__(field.dim, field._omega)
        self.field = field
        self.options = options
        self.name = f"inversions-{field.name}"

    def s(self, x, z):
        return inversions_from_field(self.field, x, z, self.options)


def connection_from_inversions(s, x, h=FD_STEP_1):
    """``Γ^l_jk(x)`` from the mixed second derivative of ``s`` on the diagonal."""
    x = np.asarray(x, dtype=float)
    z0 = x.copy()
    mixed = derivative(lambda xx: s.ds_dz(xx, np.broadcast_to(z0, xx.shape)), x, h)   # [r, l, m]
    Dz_inv = np.linalg.inv(s.ds_dz(x, x))
    Dx_inv = np.linalg.inv(s.ds_dx(x, x))
    return -np.einsum("rlm,mk,rj->lkj", mixed, Dz_inv, Dx_inv)


# -- internal vector fields ----------------------------------------------------------------

class InternalVectorField:
    """``A_x(z)`` with its Cartan field and connection.

    Quacks enough like an Ether field (``apply``, ``model``) to drive
    :class:`~ethergeom.dynamics.PathMap`.
    """

    def __init__(self, A, dim, gamma=None, omega=None, name="internal", inversions=None):
        self._A = A
        self.dim = dim
        self._gamma = gamma
        self._omega = omega
        self.name = name
        self.inversions = inversions

    @property
    def model(self):
        return self

    def omega(self, z):
        if self._omega is None:
            raise ValueError(f"{self.name} carries no symplectic form")
        return self._omega(z)

    def A(self, x, z):
        return self._A(np.asarray(x, float), np.asarray(z, float))

    generator = A

    def apply(self, x, z, v):
        return np.einsum("...nk,...k->...n", self.A(x, z), np.asarray(v, dtype=float))

    def cartan(self, x):
        return self.A(x, x)

    def gamma(self, x):
        if self._gamma is None:
            raise ValueError(f"{self.name} has no connection attached")
        return self._gamma(np.asarray(x, float))

    def torsion(self, x):
        """``T^k_sl = Γ^k_ls − Γ^k_sl`` as ``[k, s, l]``."""
        g = self.gamma(x)
        return np.swapaxes(g, -1, -2) - g

    def __repr__(self):
        return f"<InternalVectorField {self.name} d={self.dim}>"


def field_from_inversions(s, name=None):
    """Internal vector field, connection and Cartan field of an inversive structure."""
    def A(x, z):
        return s.ds_dx(x, s.inverse(x, z))

    def gamma(x):
        if x.ndim == 1:
            return connection_from_inversions(s, x)
        return np.stack([connection_from_inversions(s, xi) for xi in x.reshape(-1, s.dim)]).reshape(
            x.shape[:-1] + (s.dim,) * 3)

    return InternalVectorField(A, s.dim, gamma, s._omega, name or s.name, inversions=s)


def linear_family(M=None, symplectic=True):
    fam = LinearFamily(M)
    if symplectic:
        from .models import standard_omega
        w = standard_omega(fam.dim // 2)
        if np.allclose(fam.M.T @ w @ fam.M, w):
            fam._omega = lambda z: np.broadcast_to(w, np.shape(z)[:-1] + w.shape).copy()
    return fam


def fundamental_field(model):
    """Fundamental (involutive) field of a model with closed-form reflections."""
    return field_from_inversions(ReflectionFamily(model), name=f"fundamental-{model.name}")


def conjugate_field(s_plus):
    """``A⁻ = −(Ds⁺)⁻¹ A⁺(s⁺)`` together with ``Γ⁻`` from ``s⁻ = (s⁺)⁻¹``."""
    plus = field_from_inversions(s_plus)
    minus_inv = InverseFamily(s_plus)

    def A(x, z):
        return -np.linalg.solve(s_plus.ds_dz(x, z), plus.A(x, s_plus.s(x, z)))

    gamma = field_from_inversions(minus_inv)._gamma
    return InternalVectorField(A, s_plus.dim, gamma, s_plus._omega, f"conjugate-{s_plus.name}",
                               inversions=minus_inv)


def inversions_from_field(field, x, z, options=DEFAULT_OPTIONS):
    """``s_x(z)``: integrate ``∂s = A(s)`` along the chart segment from ``z`` to ``x``."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    x, z = np.broadcast_arrays(x, z)
    step = x - z

    def rhs(t, s):
        return field.apply(z + t * step, s, step)

    return integrate(rhs, z, 0.0, 1.0, options)


def internal_translation(field, path, options=DEFAULT_OPTIONS):
    """``g``: full internal field along ``path`` (from ``y`` to ``x`` gives ``g_{x,y}``)."""
    return PathMap(field, path, half_factor=False, options=options)


def internal_geodesics(plus, minus, x, v, t=1.0, options=DEFAULT_OPTIONS):
    """``(Exp⁺_x(vt), Exp⁻_x(vt))`` from ``dE±/dτ = ½ A±_x(E±) v``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    start = np.broadcast_to(x, v.shape).copy()
    out = []
    for f in (plus, minus):
        out.append(integrate(lambda _, E, f=f: 0.5 * f.apply(x, E, v), start, 0.0, t, options))
    return tuple(out)


# -- residuals -------------------------------------------------------------------------------

def zero_curvature_residual(field, x, z, u, v, h=FD_STEP_1):
    """``|u^k v^j (∂_k A_j − ∂_j A_k + [A_k, A_j])|`` with ``[X, Y] = DY·X − DX·Y``."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    dA = derivative(lambda xx: field.A(xx, z), x, h)            # [k, s, j] = ∂_k A^s_j
    DA = derivative(lambda zz: field.A(x, zz), z, h)            # [m, s, j] = ∂_{z^m} A^s_j
    A = field.A(x, z)
    # DA_j A_k: (∂_m A^s_j) A^m_k
    grad_term = np.einsum("msj,mk->skj", DA, A)                 # [s, k, j]
    bracket = grad_term - np.swapaxes(grad_term, 1, 2)          # [A_k, A_j]^s
    curl = np.einsum("ksj->skj", dA) - np.einsum("jsk->skj", dA)
    return float(np.linalg.norm(np.einsum("skj,k,j->s", curl + bracket, u, v)))


def diagonal_condition_residual(field, x, h=FD_STEP_1):
    """``max |D_k A^s_j + Γ^s_kl A^l_j|`` at ``z = x`` (``D`` acting on ``z``)."""
    x = np.asarray(x, dtype=float)
    DA = derivative(lambda zz: field.A(x, zz), x, h)            # [k, s, j]
    g = field.gamma(x)                                          # [s, k, l] = Γ^s_kl
    out = DA + np.einsum("skl,lj->ksj", g, field.A(x, x))
    return float(np.max(np.abs(out)))


def structural_equation_residual(field, x, u, v, h=FD_STEP_1):
    """``|(δa + ½(a∧a))(u, v)|`` with ``δ = d + Γ'∧`` and
    ``(p, q)^k = p^s T^k_sl q^l``."""
    x = np.asarray(x, dtype=float)
    da = derivative(field.cartan, x, h)                         # [k, s, j] = ∂_k a^s_j
    a = field.cartan(x)
    g = field.gamma(x)
    T = field.torsion(x)
    cov = np.einsum("ksj->skj", da) + np.einsum("skl,lj->skj", g, a)   # ∂_k a_j + Γ'_k a_j
    d_form = cov - np.swapaxes(cov, 1, 2)
    pair = np.einsum("pk,spl,lj->skj", a, T, a)                 # (a_k, a_j)
    return float(np.linalg.norm(np.einsum("skj,k,j->s", d_form + pair, u, v)))


def skew_symmetry_residual(s, x, z):
    """``‖A_x(s_x(z)) + Ds_x(z) A_x(z)‖`` — vanishes iff ``s`` is involutive."""
    f = field_from_inversions(s)
    lhs = f.A(x, s.s(x, z)) + s.ds_dz(x, z) @ f.A(x, z)
    return float(np.max(np.abs(lhs)))


def cartan_spectrum_margin(field, x):
    """Distance of the Cartan spectrum from ``{0, 1}``."""
    ev = np.linalg.eigvals(field.cartan(x))
    return float(min(np.min(np.abs(ev)), np.min(np.abs(ev - 1))))


def round_trip_residuals(s, x, z, options=DEFAULT_OPTIONS):
    """``(‖s_ODE − s‖, ‖A_from(s_ODE) − A‖)``: inversions regenerated from the
    field, and the field regenerated from those inversions."""
    field = field_from_inversions(s)
    regenerated = FieldInversions(field, options)
    s_err = float(np.max(np.abs(regenerated.s(x, z) - s.s(x, z))))
    w = s.s(x, z)                                               # A_x(w) uses s_x⁻¹(w) = z
    A_back = regenerated.ds_dx(x, z)
    A_err = float(np.max(np.abs(A_back - field.A(x, w))))
    return s_err, A_err


# -- symplectic inversive structures ----------------------------------------------------------

def internal_hamiltonian(field, x, z, nodes=64):
    """``H_x(z)_k = ∫_x^z A^j_k(x, z') ω_jm(z') dz'^m`` along the chart segment."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    nodes_s, weights = gauss_legendre_unit(nodes)
    delta = z - x
    pts = x + nodes_s.reshape((-1,) + (1,) * delta.ndim) * delta
    A = field.A(np.broadcast_to(x, pts.shape), pts)
    integrand = np.einsum("n...jk,n...jm,...m->n...k", A, field.omega(pts), delta)
    return np.tensordot(weights, integrand, axes=(0, 0))


def hamiltonian_gradient(field, x, z):
    """``∂_m H_k = A^j_k ω_jm`` (the form is exact when the inversions are symplectic)."""
    return np.einsum("...jk,...jm->...km", field.A(x, z), field.omega(z))


def symplectic_inversive_checks(s, x, z, h=FD_STEP_1):
    """Residuals for a symplectic inversive structure at ``(x, z)``:

    ``nabla_omega``  ``∇ω = 0`` for the connection of ``s``
    ``cyclic``       cyclic sum ``S_{jkl} ω_js T^s_kl``
    ``closed``       closedness of ``A^j_k ω_jm dz^m`` (so the line integral is a primitive)
    ``diagonal``     ``H_x(x) = 0``
    ``inversion``    ``H⁺_x(s⁺_x(z)) + H⁻_x(z)``
    ``second``       ``∇_l∇_m H_k − ω_ms T^s_lr Ψ^rj ∇_j H_k`` at ``z = x``
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    plus = field_from_inversions(s)
    minus = conjugate_field(s)
    out = {}
    worst_w = worst_c = worst_closed = worst_second = 0.0
    for f in (plus, minus):
        g = f.gamma(x)
        w = f.omega(x)
        dw = derivative(f.omega, x, h)                          # [k, i, j]
        nab = dw - np.einsum("lik,lj->kij", g, w) - np.einsum("ljk,il->kij", g, w)
        worst_w = max(worst_w, float(np.max(np.abs(nab))))
        T = f.torsion(x)
        c = np.einsum("js,skl->jkl", w, T)
        cyc = c + np.transpose(c, (1, 2, 0)) + np.transpose(c, (2, 0, 1))
        worst_c = max(worst_c, float(np.max(np.abs(cyc))))
        dG = derivative(lambda zz, f=f: hamiltonian_gradient(f, x, zz), z, h)   # [n, k, m]
        worst_closed = max(worst_closed, float(np.max(np.abs(dG - np.transpose(dG, (2, 1, 0))))))
        # second covariant derivative of H_k in z on the diagonal
        G0 = hamiltonian_gradient(f, x, x)                      # [k, j] = ∂_j H_k
        dG0 = derivative(lambda zz, f=f: hamiltonian_gradient(f, x, zz), x, h)  # [l, k, m]
        hess = np.einsum("lkm->klm", dG0) - np.einsum("pml,kp->klm", g, G0)      # [k, l, m]
        psi = np.linalg.inv(w)
        rhs = np.einsum("ms,slr,rj,kj->klm", w, T, psi, G0)
        worst_second = max(worst_second, float(np.max(np.abs(hess - rhs))))
    out["nabla_omega"] = worst_w
    out["cyclic"] = worst_c
    out["closed"] = worst_closed
    out["diagonal"] = float(np.max(np.abs(internal_hamiltonian(plus, x, x))))
    out["inversion"] = float(np.max(np.abs(internal_hamiltonian(plus, x, s.s(x, z))
                                           + internal_hamiltonian(minus, x, z))))
    out["second"] = worst_second
    return out


# -- affine translocation ---------------------------------------------------------------

class _CartanNormalized:
    """``A_x(z) a(x)⁻¹``: transports ``x`` along with the path for any Cartan
    field (for fundamental fields this is the usual ``½ A``)."""

    def __init__(self, field):
        self.field = field
        self.model = field

    def apply(self, x, z, v):
        w = np.linalg.solve(self.field.cartan(x), np.asarray(v, dtype=float)[..., None])[..., 0]
        return self.field.apply(x, z, w)


class AffineTranslocation:
    """Translocation of ``Ẋ = u(X)`` to the anchor ``y`` with an internal field.

    The moving frame is the path map of ``A a⁻¹`` along the trajectory, which
    carries ``y`` to ``X^t(y)``; with ``a = 2·I`` it is the symplectic path.
    """

    def __init__(self, field, u, y, options=DEFAULT_OPTIONS, du=None):
        self.field = field
        self.u = u
        self.du = du or (lambda X: jacobian(u, X))
        self.y = np.asarray(y, dtype=float)
        self.options = options

    def trajectory(self, t):
        return integrate(lambda _, X: self.u(X), self.y, 0.0, t, self.options)

    def path_map(self, t):
        return PathMap(_CartanNormalized(self.field), FlowSegment(self.u, self.y, t, self.options),
                       False, self.options)

    def vector_field(self, t, z):
        """``v^t_y(z) = Dφ(z)⁻¹ (u(φ(z)) − A_X(φ(z)) a(X)⁻¹ Ẋ)``, ``φ = [X^t(y)]``."""
        z = np.asarray(z, dtype=float)
        X = self.trajectory(t)
        w, jac = self.path_map(t).differential(z)
        push = self.u(w) - _CartanNormalized(self.field).apply(X, w, self.u(X))
        return np.linalg.solve(jac, push[..., None])[..., 0]

    def flow(self, t, x):
        return integrate(lambda s, Z: self.vector_field(s, Z), np.asarray(x, float), 0.0, t, self.options)

    def factorization_residual(self, t, x):
        x = np.asarray(x, dtype=float)
        lhs = integrate(lambda _, X: self.u(X), x, 0.0, t, self.options)
        rhs = self.path_map(t)(self.flow(t, x))
        return float(np.max(np.linalg.norm(lhs - rhs, axis=-1)))

    def equilibrium_residual(self, t):
        return float(np.max(np.abs(self.vector_field(t, self.y))))

    def covariant_du(self, X):
        """``(∇_j u)^k = ∂_j u^k + Γ^k_js u^s`` as ``[k, j]`` (``u`` fills the
        direction slot; identical to the Levi-Civita derivative without torsion)."""
        return self.du(X) + np.einsum("...kjs,...s->...kj", self.field.gamma(X), self.u(X))

    def linearization_residual(self, t):
        """``max |∇v^t_y(y) − V⁻¹ ∇u(X) V|`` (plain Jacobian at the equilibrium)."""
        jac = jacobian(lambda z: self.vector_field(t, z), self.y)
        fv = self.first_variation(t)
        target = np.linalg.solve(fv["V"], self.covariant_du(fv["X"]) @ fv["V"])
        return float(np.max(np.abs(jac - target)))

    def first_variation(self, t):
        """Joint integration of ``X``, ``V``, ``W`` and ``dX`` along the trajectory."""
        d = self.y.shape[0]

        def rhs(_, state):
            X = state[0]
            V, W, J = state[1:1 + d], state[1 + d:1 + 2 * d], state[1 + 2 * d:]
            Xdot = self.u(X)
            dV = -np.einsum("lkj,j,km->lm", self.field.gamma(X), Xdot, V)
            M = np.linalg.solve(V, self.covariant_du(X) @ V)
            return np.concatenate([Xdot[None], dV, M @ W, self.du(X) @ J])

        eye = np.eye(d)
        final = integrate(rhs, np.concatenate([self.y[None], eye, eye, eye]), 0.0, t, self.options)
        return {"X": final[0], "V": final[1:1 + d], "W": final[1 + d:1 + 2 * d], "dX": final[1 + 2 * d:]}

    def monodromy_residual(self, t):
        fv = self.first_variation(t)
        return float(np.max(np.abs(fv["dX"] - fv["V"] @ fv["W"])))

    def consistency_residual(self, t, samples=9, h=FD_STEP_2):
        """``max ‖∇_u(∇u)‖`` along the trajectory (auto-linearity)."""
        times = np.linspace(0.0, t, samples)
        pts = integrate(lambda _, X: self.u(X), self.y, 0.0, t, self.options, t_eval=times) \
            if t != 0 else self.y[None]
        worst = 0.0
        for X in pts:
            N = self.covariant_du(X)
            dN = derivative(self.covariant_du, X, h)            # [i, k, j]
            g = self.field.gamma(X)                             # [k, s, i]
            cov = dN + np.einsum("ksi,sj->ikj", g, N) - np.einsum("sji,ks->ikj", g, N)
            worst = max(worst, float(np.linalg.norm(np.einsum("i,ikj->kj", self.u(X), cov))))
        return worst

    def closed_form_residual(self, t):
        """``max |dX^t(y) − V exp(t ∇u(y))|``."""
        fv = self.first_variation(t)
        return float(np.max(np.abs(fv["dX"] - fv["V"] @ expm(t * self.covariant_du(self.y)))))


def affine_translocate(field, u, y, t, x, options=DEFAULT_OPTIONS, du=None):
    """``Z^t_y(x)`` and a residual report for the translocation of ``u``."""
    tr = AffineTranslocation(field, u, y, options, du)
    Z = tr.flow(t, x)
    report = {
        "factorization": tr.factorization_residual(t, x),
        "equilibrium": tr.equilibrium_residual(t),
        "monodromy": tr.monodromy_residual(t),
        "consistency": tr.consistency_residual(t),
    }
    if report["consistency"] < 1e-6:
        report["closed_form"] = tr.closed_form_residual(t)
    return Z, report


def path_independence_gap(field, a, b, bend=0.3, options=DEFAULT_OPTIONS, z=None):
    """Gap between internal translations along a straight and a bent path."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    z = a if z is None else z
    delta = b - a
    normal = np.zeros_like(delta)
    normal[0], normal[1] = -delta[1], delta[0]
    bent = P.bezier(a, 0.5 * (a + b) + bend * normal, b)
    return float(np.max(np.abs(internal_translation(field, P.line(a, b), options)(z)
                               - internal_translation(field, bent, options)(z))))

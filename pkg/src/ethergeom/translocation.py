"""External Hamiltonian flows and their translocation to an anchor point.

Given ``H`` with flow ``X^t`` and an anchor ``y``, the symplectic trajectory
``φ_t = [X^t(y)]`` (the ½-factor path map along the trajectory segment from
``y``) conjugates the flow into one that keeps ``y`` fixed:

    H^t_y = φ_t^*(H − ½ Ẋ^t(y)·H_{X^t(y)}) − H(y),    X^t = φ_t ∘ Z^t_y,

where ``Z^t_y`` is the flow of the time-dependent Hamiltonian ``H^t_y``.
Linearizing at ``y`` factors the monodromy into parallel transport ``V`` and a
dynamic part ``W`` driven by the covariant Hessian of ``H``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .dynamics import FlowSegment, path_symplectomorphism
from .models import covariant_hessian, flat_r2n, get_model, poisson_tensor
from .numerics import DEFAULT_OPTIONS, FD_STEP_1, FD_STEP_2, derivative, gradient, hessian, integrate


@dataclass(frozen=True)
class HamiltonianSystem:
    """Scalar Hamiltonian with closed-form first and second derivatives.

    ``value``, ``grad`` and ``hess`` are vectorized over leading axes.
    """

    model: object
    name: str
    value: Callable
    grad: Callable
    hess: Callable
    params: dict = field(default_factory=dict)

    def vector_field(self, x):
        """``∇H(x) Ψ(x)``."""
        x = np.asarray(x, dtype=float)
        psi = np.linalg.inv(self.model.omega(x))
        return np.einsum("...a,...ab->...b", self.grad(x), psi)

    def covariant_hessian(self, x):
        x = np.asarray(x, dtype=float)
        return covariant_hessian(self.model, self.value, x,
                                 grad=self.grad, hess=self.hess)

    def flow(self, t, x, options=DEFAULT_OPTIONS):
        return hamiltonian_flow(self, t, x, options)

    def segment(self, y, t, options=DEFAULT_OPTIONS):
        """The trajectory segment from ``y`` over time ``t`` as a path."""
        return FlowSegment(self.vector_field, y, t, options, label=f"{self.name}-trajectory")


# -- registry -----------------------------------------------------------------

def _quadratic_form(x):
    return 0.5 * np.sum(x * x, axis=-1)


def flat_oscillator(n=1):
    model = flat_r2n(n)
    return HamiltonianSystem(
        model, "flat-oscillator", _quadratic_form, lambda x: np.asarray(x, dtype=float),
        lambda x: np.broadcast_to(np.eye(model.dim), np.shape(x) + (model.dim,)).copy())


def flat_quartic(n=1, strength=0.5):
    model = flat_r2n(n)
    lam = float(strength)
    return HamiltonianSystem(
        model, "flat-quartic",
        lambda x: _quadratic_form(x) + 0.25 * lam * np.sum(np.asarray(x) ** 4, axis=-1),
        lambda x: np.asarray(x) + lam * np.asarray(x) ** 3,
        lambda x: np.eye(model.dim) + 3 * lam * np.einsum("...i,ij->...ij", np.asarray(x) ** 2, np.eye(model.dim)),
        {"strength": lam})


def flat_cubic(n=1):
    """``Σ_i x_i³`` — not covariantly quadratic along its own flow."""
    model = flat_r2n(n)
    return HamiltonianSystem(
        model, "flat-cubic",
        lambda x: np.sum(np.asarray(x) ** 3, axis=-1),
        lambda x: 3 * np.asarray(x) ** 2,
        lambda x: 6 * np.einsum("...i,ij->...ij", np.asarray(x), np.eye(model.dim)))


def flat_quadratic(matrix):
    """``½ xᵀ S x`` with a symmetric matrix ``S``."""
    S = np.asarray(matrix, dtype=float)
    S = 0.5 * (S + S.T)
    model = flat_r2n(S.shape[0] // 2)
    return HamiltonianSystem(
        model, "flat-quadratic",
        lambda x: 0.5 * np.einsum("...i,ij,...j->...", x, S, x),
        lambda x: np.asarray(x) @ S,
        lambda x: np.broadcast_to(S, np.shape(x) + S.shape[-1:]).copy(),
        {"matrix": S.tolist()})


def sphere_height(cap=2.0):
    """Height of the unit sphere in the stereographic chart; its flow is a
    counter-clockwise rotation of the chart with period ``2π``."""
    model = get_model("sphere-s2", cap=cap)

    def value(x):
        q = np.sum(np.asarray(x) ** 2, axis=-1)
        return (1 - q) / (1 + q)

    def grad(x):
        x = np.asarray(x, dtype=float)
        q = np.sum(x * x, axis=-1)[..., None]
        return -4 * x / (1 + q) ** 2

    def hess(x):
        x = np.asarray(x, dtype=float)
        q = np.sum(x * x, axis=-1)[..., None, None]
        outer = np.einsum("...i,...j->...ij", x, x)
        return -4 * np.eye(2) / (1 + q) ** 2 + 16 * outer / (1 + q) ** 3

    return HamiltonianSystem(model, "sphere-height", value, grad, hess)


def hyperbolic_quadratic(cap=0.9):
    """Hyperboloid height ``(1+q)/(1−q)`` on the Poincaré disc (a quadratic
    function of the ambient Minkowski coordinates)."""
    model = get_model("hyperbolic-h2", cap=cap)

    def value(x):
        q = np.sum(np.asarray(x) ** 2, axis=-1)
        return (1 + q) / (1 - q)

    def grad(x):
        x = np.asarray(x, dtype=float)
        q = np.sum(x * x, axis=-1)[..., None]
        return 4 * x / (1 - q) ** 2

    def hess(x):
        x = np.asarray(x, dtype=float)
        q = np.sum(x * x, axis=-1)[..., None, None]
        outer = np.einsum("...i,...j->...ij", x, x)
        return 4 * np.eye(2) / (1 - q) ** 2 + 16 * outer / (1 - q) ** 3

    return HamiltonianSystem(model, "hyperbolic-quadratic", value, grad, hess)


HAMILTONIANS = {
    "flat-oscillator": flat_oscillator,
    "flat-quartic": flat_quartic,
    "flat-cubic": flat_cubic,
    "sphere-height": sphere_height,
    "hyperbolic-quadratic": hyperbolic_quadratic,
}


def get_hamiltonian(name, **params):
    try:
        factory = HAMILTONIANS[name]
    except KeyError:
        raise ValueError(f"unknown Hamiltonian {name!r}; choose from {sorted(HAMILTONIANS)}") from None
    return factory(**params)


# -- flows ----------------------------------------------------------------------

def hamiltonian_flow(system, t, x, options=DEFAULT_OPTIONS):
    """``X^t(x)`` for a batch of points."""
    x = np.asarray(x, dtype=float)
    out = integrate(lambda _, X: system.vector_field(X), x, 0.0, t, options)
    system.model.check_domain(out)
    return out


def flow_differential(system, t, x, options=DEFAULT_OPTIONS):
    """``(X^t(x), dX^t(x))`` from the variational equation of the flow."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]

    def rhs(_, state):
        X = state[:, 0]
        J = state[:, 1:]
        F = np.moveaxis(derivative(system.vector_field, X, FD_STEP_1), 0, -1)
        return np.concatenate([system.vector_field(X)[:, None], F @ J], axis=1)

    state = np.concatenate([x[:, None], np.eye(d)], axis=1)
    final = integrate(rhs, state, 0.0, t, options)
    return final[:, 0], final[:, 1:]


def energy_drift(system, t, x, options=DEFAULT_OPTIONS):
    x = np.asarray(x, dtype=float)
    return float(np.max(np.abs(system.value(hamiltonian_flow(system, t, x, options)) - system.value(x))))


# -- translocation -------------------------------------------------------------------

def symplectic_trajectory(field, system, y, t, options=DEFAULT_OPTIONS):
    """``[X^t(y)]``: the ½-factor path map along the trajectory segment."""
    return path_symplectomorphism(field, system.segment(y, t, options), options)


def _shifted_gradient(field, system, anchor_now, w):
    """``∇(H − ½ Ẋ·H_X)(w)`` at the current trajectory point ``X``."""
    xdot = system.vector_field(anchor_now)
    shift = np.einsum("k,...km->...m", xdot, field.grad_z(anchor_now, w))
    return system.grad(w) - 0.5 * shift


@dataclass
class TranslocatedSystem:
    """The time-dependent Hamiltonian ``H^t_y`` and its flow ``Z^t_y``."""

    field: object
    system: HamiltonianSystem
    anchor: np.ndarray
    options: object = DEFAULT_OPTIONS

    def __post_init__(self):
        self.anchor = np.asarray(self.anchor, dtype=float)
        self._h0 = float(self.system.value(self.anchor))

    def trajectory_point(self, t):
        return hamiltonian_flow(self.system, t, self.anchor, self.options)

    def value(self, t, z):
        """``H^t_y(z)``."""
        z = np.asarray(z, dtype=float)
        X = self.trajectory_point(t)
        xdot = self.system.vector_field(X)
        w = symplectic_trajectory(self.field, self.system, self.anchor, t, self.options)(z)
        shifted = self.system.value(w) - 0.5 * np.einsum("k,...k->...", xdot, self.field.value(X, w))
        return shifted - self._h0

    def vector_field(self, t, z):
        """``∇H^t_y(z) Ψ(z)`` via the chain rule through ``[X^t(y)]``."""
        z = np.asarray(z, dtype=float)
        X = self.trajectory_point(t)
        w, jac = symplectic_trajectory(self.field, self.system, self.anchor, t, self.options).differential(z)
        grad = np.einsum("...a,...ai->...i", _shifted_gradient(self.field, self.system, X, w), jac)
        psi = np.linalg.inv(self.field.model.omega(z))
        return np.einsum("...a,...ab->...b", grad, psi)

    def flow(self, t, x, options=None):
        """``Z^t_y(x)``: each right-hand-side evaluation re-integrates the
        symplectic trajectory up to the current time."""
        x = np.asarray(x, dtype=float)
        return integrate(lambda s, Z: self.vector_field(s, Z), x, 0.0, t, options or self.options)


def translocate(field, system, y, t, z, options=DEFAULT_OPTIONS):
    """``H^t_y(z)``."""
    return TranslocatedSystem(field, system, y, options).value(t, z)


def factorization_check(field, system, y, t, x, options=DEFAULT_OPTIONS):
    """``max ‖X^t(x) − [X^t(y)](Z^t_y(x))‖`` over a batch of ``x``."""
    x = np.asarray(x, dtype=float)
    trans = TranslocatedSystem(field, system, y, options)
    Z = trans.flow(t, x)
    lhs = hamiltonian_flow(system, t, x, options)
    rhs = symplectic_trajectory(field, system, y, t, options)(Z)
    return float(np.max(np.linalg.norm(lhs - rhs, axis=-1)))


def stationarity_check(field, system, y, t, options=DEFAULT_OPTIONS):
    """``(|H^t_y(y)|, ‖∇H^t_y(y)‖)`` — the latter by central differences."""
    trans = TranslocatedSystem(field, system, y, options)
    value = abs(float(trans.value(t, y)))
    grad = gradient(lambda z: trans.value(t, z), np.asarray(y, dtype=float), FD_STEP_1)
    return value, float(np.max(np.abs(grad)))


@dataclass
class MonodromyFactorization:
    """``dX^t(y) = V ∘ W`` with ``V`` parallel transport along the trajectory."""

    t: float
    point: np.ndarray
    V: np.ndarray
    W: np.ndarray
    monodromy: np.ndarray

    @property
    def product(self):
        return self.V @ self.W

    @property
    def residual(self):
        return float(np.max(np.abs(self.monodromy - self.product)))


def first_variation(system, y, t, options=DEFAULT_OPTIONS):
    """Integrate the trajectory, ``V``, ``W`` and ``dX`` jointly.

    ``dV/dt = −Γ(X)[Ẋ] V``, ``dW/dt = −Ψ(y) Vᵀ ∇²H(X) V W`` and
    ``d(dX)/dt = D(∇HΨ)(X) dX``.
    """
    model = system.model
    y = np.asarray(y, dtype=float)
    d = y.shape[0]
    psi_y = poisson_tensor(model, y)

    def rhs(_, state):
        X = state[0]
        V, W, J = state[1:1 + d], state[1 + d:1 + 2 * d], state[1 + 2 * d:]
        Xdot = system.vector_field(X)
        g = model.gamma(X)
        dV = -np.einsum("lkj,j,km->lm", g, Xdot, V)
        M = -psi_y @ V.T @ system.covariant_hessian(X) @ V
        F = np.moveaxis(derivative(system.vector_field, X, FD_STEP_1), 0, -1)
        return np.concatenate([Xdot[None], dV, M @ W, F @ J])

    eye = np.eye(d)
    state = np.concatenate([y[None], eye, eye, eye])
    final = integrate(rhs, state, 0.0, t, options)
    return MonodromyFactorization(t, final[0], final[1:1 + d], final[1 + d:1 + 2 * d], final[1 + 2 * d:])


def hessian_check(field, system, y, t, options=DEFAULT_OPTIONS, h=FD_STEP_2):
    """``max |∇²H^t_y(y) − Vᵀ ∇²H(X^t(y)) V|`` with the left side by central
    differences (at a stationary point the covariant and plain Hessians agree)."""
    y = np.asarray(y, dtype=float)
    trans = TranslocatedSystem(field, system, y, options)
    fd = hessian(lambda z: trans.value(t, z), y, h)
    fv = first_variation(system, y, t, options)
    target = fv.V.T @ system.covariant_hessian(fv.point) @ fv.V
    return float(np.max(np.abs(fd - target)))


def covariant_quadratic_residual(system, y, t, samples=9, options=DEFAULT_OPTIONS, h=FD_STEP_1):
    """``max ‖∇_{X_H}(∇²H)‖`` at ``samples`` points of the trajectory from ``y``.

    The covariant derivative of the (0,2)-tensor ``S = ∇²H`` along ``u`` is
    ``u^i(∂_i S_jk − Γ^m_ji S_mk − Γ^m_ki S_jm)``.
    """
    model = system.model
    times = np.linspace(0.0, t, samples)
    pts = integrate(lambda _, X: system.vector_field(X), np.asarray(y, dtype=float), 0.0, t,
                    options, t_eval=times) if t != 0 else np.asarray(y, dtype=float)[None]
    worst = 0.0
    for X in pts:
        S = system.covariant_hessian(X)
        dS = derivative(system.covariant_hessian, X, h)          # [i, j, k]
        g = model.gamma(X)                                       # [m, j, i]
        cov = dS - np.einsum("mji,mk->ijk", g, S) - np.einsum("mki,jm->ijk", g, S)
        u = system.vector_field(X)
        worst = max(worst, float(np.linalg.norm(np.einsum("i,ijk->jk", u, cov))))
    return worst


def quadratic_monodromy_residual(system, y, t, options=DEFAULT_OPTIONS):
    """``max |dX^t(y) − V exp(−t Ψ(y) ∇²H(y))|`` (closed form for covariantly
    quadratic Hamiltonians)."""
    y = np.asarray(y, dtype=float)
    fv = first_variation(system, y, t, options)
    closed = fv.V @ expm(-t * poisson_tensor(system.model, y) @ system.covariant_hessian(y))
    return float(np.max(np.abs(fv.monodromy - closed)))

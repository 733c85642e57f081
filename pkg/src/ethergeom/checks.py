"""Executable invariant suites.

Every acceptance criterion ``C1`` … ``C10`` is one named suite; a suite emits
one record per (sub-check, model, sample) with a residual, a threshold and a
comparison.  Random inputs are drawn from a generator seeded by the run seed
and the CRC32 of the check id, so results do not depend on execution order.
"""
from __future__ import annotations

import csv
import io
import json
import zlib
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np
from scipy.optimize import brentq

from . import affine as AF
from . import dynamics as D
from . import ether as E
from . import holonomy as HL
from . import paths as P
from . import phase as PH
from . import translocation as T
from .models import get_model, parallel_transport, sample_points, symplectic_defect
from .numerics import IntegratorOptions, jacobian, slope_fit

CRITERIA = ("C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9", "C10")

SUBCOMMANDS = {
    "check": ("C1", "C2", "C3", "C10"),
    "flow": ("C4", "C5"),
    "holonomy": ("C6",),
    "translocate": ("C7",),
    "phase": ("C8",),
    "affine": ("C9",),
}

CURVED = ("sphere-s2", "hyperbolic-h2")


class ConfigError(ValueError):
    """Malformed run configuration."""


def _tuple_of(kind):
    def parse(text):
        if isinstance(text, (tuple, list)):
            return tuple(kind(t) for t in text)
        text = str(text).strip()
        return tuple(kind(t) for t in text.split(",") if t.strip()) if text else ()
    return parse


@dataclass(frozen=True)
class RunConfig:
    """Model list, integrator/FD settings, sweep lists and the seed."""

    models: tuple = ("flat-r2",) + CURVED
    strategy: str = "auto"
    rtol: float = 1e-10
    atol: float = 1e-10
    fd_step: float = 1e-5
    fd_step2: float = 1e-3
    samples: int = 20
    paths: int = 50
    areas: tuple = (0.04, 0.02, 0.01, 0.005)
    holonomy_areas: tuple = (0.1, 0.05, 0.02)
    times: tuple = (0.5,)
    phase_gate: float = 1e-5
    seed: int = 0
    output: str = "reports"

    _PARSERS = {
        "models": _tuple_of(str), "areas": _tuple_of(float), "holonomy_areas": _tuple_of(float),
        "times": _tuple_of(float), "samples": int, "paths": int, "seed": int,
        "rtol": float, "atol": float, "fd_step": float, "fd_step2": float, "phase_gate": float,
        "strategy": str, "output": str,
    }

    def __post_init__(self):
        for name in ("rtol", "atol", "fd_step", "fd_step2", "phase_gate"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.samples < 0 or self.paths < 0:
            raise ConfigError("sample counts must be non-negative")
        if any(a <= 0 for a in self.areas + self.holonomy_areas):
            raise ConfigError("areas must be positive")

    @property
    def options(self):
        return IntegratorOptions(rtol=self.rtol, atol=self.atol)

    def with_overrides(self, pairs):
        """Apply ``{key: text}`` overrides with type coercion."""
        updates = {}
        for key, text in pairs.items():
            key = key.strip().replace("-", "_")
            if key not in self._PARSERS:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                updates[key] = self._PARSERS[key](text)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {text!r}") from exc
        return replace(self, **updates)

    @classmethod
    def from_text(cls, text, base=None):
        """Parse flat ``key = value`` lines (``#`` comments allowed)."""
        pairs = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value")
            key, value = line.split("=", 1)
            pairs[key.strip()] = value.strip()
        return (base or cls()).with_overrides(pairs)

    def as_dict(self):
        """Report-relevant settings (the output location is not part of a result)."""
        return {f.name: (list(v) if isinstance(v := getattr(self, f.name), tuple) else v)
                for f in fields(self) if f.name != "output"}


@dataclass
class CheckRecord:
    check_id: str
    criterion: str
    eq_tag: str
    residual: float
    threshold: float
    comparison: str = "<"
    inputs: dict = field(default_factory=dict)

    @property
    def passed(self):
        r = self.residual
        if not np.isfinite(r):
            return False
        if self.comparison == "<":
            return r < self.threshold
        if self.comparison == ">":
            return r > self.threshold
        if self.comparison == ">=":
            return r >= self.threshold
        if self.comparison == "±":
            lo, hi = self.inputs["band"]
            return lo <= r <= hi
        raise ValueError(self.comparison)

    @property
    def severity(self):
        """How far the residual sits on the wrong side of its threshold (log10 scale)."""
        r, t = abs(self.residual), abs(self.threshold)
        if not np.isfinite(r):
            return np.inf
        if self.comparison == "±":
            lo, hi = self.inputs["band"]
            return abs(np.log10(max(r, 1e-300) / (lo if r < lo else hi)))
        ratio = np.log10(max(r, 1e-300) / max(t, 1e-300))
        return ratio if self.comparison == "<" else -ratio

    def as_dict(self):
        out = asdict(self)
        out["pass"] = bool(self.passed)
        out["residual"] = float(self.residual)
        return out


@dataclass
class Report:
    subcommand: str
    config: dict
    records: list

    @property
    def passed(self):
        return all(r.passed for r in self.records)

    def criteria_status(self):
        status = {}
        for r in self.records:
            status[r.criterion] = status.get(r.criterion, True) and r.passed
        return status

    def worst(self, count=5):
        failing = [r for r in self.records if not r.passed]
        return sorted(failing, key=lambda r: -r.severity)[:count]

    def to_json(self):
        doc = {
            "subcommand": self.subcommand,
            "config": self.config,
            "checks": [r.as_dict() for r in self.records],
            "summary": {"total": len(self.records),
                        "failed": sum(not r.passed for r in self.records),
                        "criteria": self.criteria_status()},
        }
        return json.dumps(_plain(doc), sort_keys=True, indent=2) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check_id", "eq_tag", "residual", "threshold", "pass"])
        for r in self.records:
            w.writerow([r.check_id, r.eq_tag, f"{r.residual:.6e}", f"{r.threshold:.6e}", int(r.passed)])
        return buf.getvalue()


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(f"{float(obj):.12g}")
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def check_rng(cfg, check_id):
    return np.random.default_rng([cfg.seed, zlib.crc32(check_id.encode())])


# -- helpers ----------------------------------------------------------------------

def _radius(model):
    return 0.5 if not np.isfinite(model.cap) else min(0.5, 0.4 * model.cap)


def _points(model, rng, count, radius=None):
    return sample_points(model, rng, count, radius or _radius(model))


def _random_path(model, rng, radius=None):
    a, b = _points(model, rng, 2, radius)
    amps = rng.uniform(-0.08, 0.08, size=(2, model.dim))
    return P.wiggle(a, b, amps)


def _field(cfg, model):
    return E.make_ether(model, cfg.strategy)


class _Suite:
    """Collects records for one criterion."""

    def __init__(self, criterion, cfg):
        self.criterion = criterion
        self.cfg = cfg
        self.records = []

    def rng(self, check_id):
        return check_rng(self.cfg, check_id)

    def add(self, check_id, tag, residual, threshold, comparison="<", **inputs):
        self.records.append(CheckRecord(f"{self.criterion}.{check_id}", self.criterion, tag,
                                        float(residual), float(threshold), comparison, inputs))


def _models(cfg, allowed=None):
    names = [m for m in cfg.models if allowed is None or m in allowed or
             (allowed == "flat" and m.startswith("flat"))]
    return [(n, get_model(n)) for n in names]


# -- C1: flat closed forms ------------------------------------------------------------------

def suite_flat(cfg):
    s = _Suite("C1", cfg)
    opts = cfg.options
    for name, model in _models(cfg, "flat"):
        f = E.ether_flat(model)
        rng = s.rng(f"C1.{name}")
        x, z, y = (_points(model, rng, cfg.samples) for _ in range(3))
        if cfg.samples == 0:
            continue
        s.add(f"reflection.{name}", "reflection-ode", np.max(np.abs(E.reflection(f, x, z, opts) - (2 * x - z))),
              1e-8, samples=cfg.samples)
        worst_g = worst_s = 0.0
        for i in range(min(cfg.samples, 5)):
            path = _random_path(model, rng)
            a, b = path.start, path.end
            worst_g = max(worst_g, np.max(np.abs(D.ether_translation(f, path, opts)(z) - (z + 2 * (b - a)))))
            worst_s = max(worst_s, np.max(np.abs(D.path_symplectomorphism(f, path, opts)(z) - (z + b - a))))
        s.add(f"translation.{name}", "translation-closed-form", worst_g, 1e-8)
        s.add(f"symplectic_path.{name}", "endpoint-translation", worst_s, 1e-8)
        v = y - x
        s.add(f"exponential.{name}", "ether-exponential",
              max(np.max(np.abs(D.ether_exponential(f, xi, vi, 1.0, opts) - (xi + vi))) for xi, vi in zip(x, v)),
              1e-8)
    return s.records


# -- C2: Ether axioms -----------------------------------------------------------------------

def suite_axioms(cfg):
    s = _Suite("C2", cfg)
    opts = cfg.options
    for name, model in _models(cfg):
        f = _field(cfg, model)
        rng = s.rng(f"C2.{name}")
        if cfg.samples == 0:
            continue
        x = _points(model, rng, cfg.samples)
        z = x + 0.2 * _points(model, rng, cfg.samples, 1.0)
        sz = E.reflection(f, x, z, opts)
        s.add(f"involution.{name}", "reflection-involution",
              np.max(np.abs(E.reflection(f, x, sz, opts) - z)), 1e-8)
        jac = jacobian(lambda zz: E.reflection(f, x, zz, opts), z, cfg.fd_step)
        s.add(f"symplectic_reflection.{name}", "reflection-symplectic",
              symplectic_defect(model, jac, z, sz), 1e-7)
        worst_g = worst_s = 0.0
        for _ in range(3):
            path = _random_path(model, rng)
            zz = path.start + 0.2 * _points(model, rng, 4, 1.0)
            worst_g = max(worst_g, D.ether_translation(f, path, opts).symplectic_defect(zz))
            worst_s = max(worst_s, D.path_symplectomorphism(f, path, opts).symplectic_defect(zz))
        s.add(f"symplectic_translation.{name}", "translation-symplectic", worst_g, 1e-7)
        s.add(f"symplectic_path.{name}", "path-symplectic", worst_s, 1e-7)
        s.add(f"skew.{name}", "skew-symmetry",
              max(E.skew_symmetry_residual(f, xi, zi) for xi, zi in zip(x, z)), 1e-6)
        dirs = rng.normal(size=(cfg.samples, 2, model.dim))
        s.add(f"zero_curvature.{name}", "zero-curvature",
              max(E.zero_curvature_residual(f, xi, zi, u, v, cfg.fd_step)
                  for xi, zi, (u, v) in zip(x, z, dirs)), 1e-6)
        b = [E.boundary_residuals(f, xi, cfg.fd_step2) for xi in x[:5]]
        s.add(f"boundary.{name}", "diagonal-boundary",
              max(max(r.values()) for r in b), 1e-6)
        if model.name in CURVED:
            s.records.append(_jet_slope_record(cfg, model))
    return s.records


def _jet_slope_record(cfg, model):
    base = np.array([0.2, -0.1])
    jet = E.JetEther(model, 3, 0.5)
    direction = np.array([0.6, -0.8])
    eps = np.array([0.08, 0.04, 0.02, 0.01])
    u, v = np.eye(2)
    res = [E.zero_curvature_residual(jet, base, base + e * direction, u, v, h=1e-4) for e in eps]
    slope = slope_fit(eps, res)
    return CheckRecord(f"C2.jet_slope.{model.name}", "C2", "jet-zero-curvature-order", slope, 3.0, "±",
                       {"band": [2.7, 3.3], "eps": eps.tolist(), "residuals": res, "base": base.tolist()})


# -- C3: translations are compositions of reflections ---------------------------------------

def suite_translation(cfg):
    s = _Suite("C3", cfg)
    opts = cfg.options
    for name, model in _models(cfg):
        f = _field(cfg, model)
        rng = s.rng(f"C3.{name}")
        worst_c = worst_p = 0.0
        for _ in range(min(cfg.samples, 8)):
            path = _random_path(model, rng)
            z = _points(model, rng, 6)
            worst_c = max(worst_c, D.reflection_composition_check(f, path, z, opts))
            straight = D.ether_translation(f, P.line(path.start, path.end), opts)
            worst_p = max(worst_p, float(np.max(np.abs(straight(z) - D.ether_translation(f, path, opts)(z)))))
        if cfg.samples:
            s.add(f"composition.{name}", "translation-is-reflection-pair", worst_c, 1e-7)
            s.add(f"path_independence.{name}", "translation-path-independence", worst_p, 1e-7)
    return s.records


# -- C4: endpoint identity and parallel transport -------------------------------------------

def suite_paths(cfg):
    s = _Suite("C4", cfg)
    opts = cfg.options
    for name, model in _models(cfg):
        f = _field(cfg, model)
        rng = s.rng(f"C4.{name}")
        worst_e = worst_v = 0.0
        for _ in range(cfg.paths):
            path = _random_path(model, rng)
            img, jac = D.path_symplectomorphism(f, path, opts).differential(path.start)
            worst_e = max(worst_e, float(np.max(np.abs(img - path.end))))
            worst_v = max(worst_v, float(np.max(np.abs(jac - parallel_transport(model, path, opts)))))
        if cfg.paths:
            s.add(f"endpoint.{name}", "path-endpoint", worst_e, 1e-7, paths=cfg.paths)
            s.add(f"transport.{name}", "linearization-is-transport", worst_v, 1e-5, paths=cfg.paths)
    return s.records


# -- C5: groupoid, commutation, shape dependence ------------------------------------------

def suite_groupoid(cfg):
    s = _Suite("C5", cfg)
    opts = cfg.options
    for name, model in _models(cfg):
        f = _field(cfg, model)
        rng = s.rng(f"C5.{name}")
        worst_c = worst_k = 0.0
        for _ in range(min(cfg.samples, 5)):
            a, b, c = _points(model, rng, 3)
            p1, p2 = P.wiggle(a, b, rng.uniform(-0.05, 0.05, (1, 2))), P.line(b, c)
            m1 = D.path_symplectomorphism(f, p1, opts)
            m2 = D.path_symplectomorphism(f, p2, opts)
            z = _points(model, rng, 5)
            worst_c = max(worst_c, float(np.max(np.abs(D.groupoid_compose(m2, m1)(z) - m2(m1(z))))))
            worst_k = max(worst_k, D.reflection_commutation_check(f, p1, z, opts))
        if cfg.samples:
            s.add(f"composition.{name}", "groupoid-composition", worst_c, 1e-7)
            s.add(f"commutation.{name}", "reflection-commutation", worst_k, 1e-6)
        if model.name in CURVED:
            a, b = np.array([-0.2, 0.1]), np.array([0.25, 0.2])
            z = np.array([[0.1, -0.3], [0.4, 0.3]])
            straight = D.path_symplectomorphism(f, P.line(a, b), opts)(z)
            bent = D.path_symplectomorphism(f, P.bezier(a, np.array([0.0, 0.5]), b), opts)(z)
            s.add(f"shape_dependence.{name}", "path-shape-dependence",
                  float(np.max(np.abs(straight - bent))), 1e-3, ">")
    return s.records


# -- C6: curvature and holonomy ---------------------------------------------------------

def _loop_enclosing(model, area):
    """Circle about the chart origin whose symplectic area equals ``area``."""
    def excess(radius):
        return HL.symplectic_area(model, P.circle_loop(np.array([radius, 0.0]), np.zeros(2))) - area
    guess = 0.5 * np.sqrt(area / np.pi)
    radius = brentq(excess, 0.5 * guess, 2.0 * guess, xtol=1e-14)
    return P.circle_loop(np.array([radius, 0.0]), np.zeros(2))


def suite_curvature(cfg):
    s = _Suite("C6", cfg)
    opts = cfg.options
    for name, model in _models(cfg, CURVED):
        f = _field(cfg, model)
        base = np.array([0.1, -0.15])
        for label, x in (("centre", np.zeros(2)), ("offset", base)):
            d = HL.diagonal_curvature_check(f, x, cfg.fd_step2)
            s.add(f"curvature_value.{name}.{label}", "curvature-diagonal-value", d["value"], 1e-8)
            s.add(f"curvature_gradient.{name}.{label}", "curvature-diagonal-gradient", d["gradient"], 1e-5)
            s.add(f"curvature_hessian.{name}.{label}", "curvature-diagonal-hessian", d["hessian"], 1e-3,
                  unit_factor_residual=d["hessian_unit_factor"])
        if cfg.areas:
            rep = HL.small_loop_expansion_check(f, base, 0, 1, list(cfg.areas), base + np.array([0.2, 0.1]), opts)
            s.add(f"small_loop_slope.{name}", "small-loop-expansion", rep.slope, 1.5, ">=",
                  areas=list(cfg.areas), deltas=rep.deltas.tolist())
        sign = 1.0 if model.kappa > 0 else -1.0
        for area in cfg.holonomy_areas:
            if area > 0.1:
                continue
            loop = _loop_enclosing(model, area)
            enclosed = HL.symplectic_area(model, loop)
            angle = HL.holonomy_angle(f, loop, opts)
            s.add(f"holonomy_angle.{name}.{area:g}", "holonomy-angle-area",
                  abs(angle - sign * enclosed) / abs(enclosed), 0.01, area=enclosed, angle=angle)
    return s.records


def holonomy_sweep(cfg):
    """``(model, area, delta)`` rows plus slopes for the CSV side table."""
    rows = []
    for name, model in _models(cfg, CURVED):
        if not cfg.areas:
            continue
        base = np.array([0.1, -0.15])
        rep = HL.small_loop_expansion_check(_field(cfg, model), base, 0, 1, list(cfg.areas),
                                            base + np.array([0.2, 0.1]), cfg.options)
        rows += [(name, a, dlt, rep.slope) for a, dlt in zip(rep.areas, rep.deltas)]
    return rows


# -- C7: translocation ---------------------------------------------------------------

def _systems_for(name):
    if name.startswith("flat"):
        return [T.flat_oscillator(), T.flat_quartic()]
    if name == "sphere-s2":
        return [T.sphere_height()]
    if name == "hyperbolic-h2":
        return [T.hyperbolic_quadratic()]
    return []


def suite_translocation(cfg):
    s = _Suite("C7", cfg)
    opts = cfg.options
    for name, model in _models(cfg):
        if model.dim != 2:
            continue
        f = _field(cfg, model)
        rng = s.rng(f"C7.{name}")
        y = np.array([0.3, -0.2])
        for system in _systems_for(name):
            tag = f"{name}.{system.name}"
            for t in cfg.times:
                x = y + rng.uniform(-0.2, 0.2, (3, 2))
                s.add(f"factorization.{tag}.t{t:g}", "translocation-factorization",
                      T.factorization_check(f, system, y, t, x, opts), 1e-6)
                value, grad = T.stationarity_check(f, system, y, t, opts)
                s.add(f"stationary_value.{tag}.t{t:g}", "translocated-equilibrium", value, 1e-7)
                s.add(f"stationary_gradient.{tag}.t{t:g}", "translocated-equilibrium", grad, 1e-7)
                s.add(f"hessian.{tag}.t{t:g}", "translocated-hessian",
                      T.hessian_check(f, system, y, t, opts, cfg.fd_step2), 1e-4)
                fv = T.first_variation(system, y, t, opts)
                s.add(f"first_variation.{tag}.t{t:g}", "monodromy-factorization", fv.residual, 1e-5)
                cq = T.covariant_quadratic_residual(system, y, t, options=opts)
                if cq < 1e-6:
                    s.add(f"quadratic_closed_form.{tag}.t{t:g}", "covariantly-quadratic-monodromy",
                          T.quadratic_monodromy_residual(system, y, t, opts), 1e-6, quadratic_residual=cq)
            if system.name.startswith("flat-oscillator"):
                z = y + rng.uniform(-0.5, 0.5, (5, 2))
                worst = max(float(np.max(np.abs(T.translocate(f, system, y, t, z, opts)
                                                - 0.5 * np.sum((z - y) ** 2, axis=-1))))
                            for t in cfg.times)
                s.add(f"oscillator_closed_form.{tag}", "oscillator-translocation", worst, 1e-9)
    return s.records


# -- C8: generating phase -------------------------------------------------------------

def _phase_path(model):
    if model.name.startswith("flat"):
        return P.line(np.zeros(2), np.array([1.0, 0.0]))
    return P.geodesic_arc(model, np.array([-0.2, 0.1]), np.array([0.2, 0.25]))


def suite_phase(cfg):
    s = _Suite("C8", cfg)
    opts = cfg.options
    for name, model in _models(cfg):
        if model.dim != 2:
            continue
        f = _field(cfg, model)
        path = _phase_path(model)
        x = np.array([0.3, 0.2])
        g = PH.generating_phase(f, path, x, gate=cfg.phase_gate, options=opts)
        s.add(f"mesh_gate.{name}", "phase-mesh-convergence", g.mesh_change, cfg.phase_gate, mesh=g.mesh)
        s.add(f"differential.{name}", "phase-differential", g.residual, 1e-4,
              dphase=g.dphase, target=g.target)
        hj, _, _ = PH.hamilton_jacobi_residual(f, path, x, n=g.mesh, options=opts)
        s.add(f"hamilton_jacobi.{name}", "hamilton-jacobi", hj, 1e-4)
        spread, gap = PH.auxiliary_independence(f, path, np.array([x, x + 0.05]), n=g.mesh, options=opts)
        s.add(f"auxiliary_constant.{name}", "auxiliary-path-constant", spread, 1e-5)
        s.add(f"auxiliary_differential.{name}", "auxiliary-path-differential", gap, 1e-5)
    return s.records


# -- C9: affine extension ----------------------------------------------------------------

def suite_affine(cfg):
    s = _Suite("C9", cfg)
    opts = cfg.options
    rng = s.rng("C9")
    sphere = get_model("sphere-s2")
    families = [AF.linear_family(), AF.ReflectionFamily(get_model("flat-r2")), AF.ReflectionFamily(sphere)]
    for fam in families:
        tag = fam.name
        x = rng.uniform(-0.3, 0.3, (3, 2))
        z = x + rng.uniform(-0.2, 0.2, (3, 2))
        plus = AF.field_from_inversions(fam)
        minus = AF.conjugate_field(fam)
        rt = [AF.round_trip_residuals(fam, xi, zi, opts) for xi, zi in zip(x, z)]
        s.add(f"round_trip.{tag}", "field-inversion-round-trip", max(max(r) for r in rt), 1e-6)
        u, v = rng.normal(size=(2, 2))
        s.add(f"conjugate_zero_curvature.{tag}", "conjugate-zero-curvature",
              max(AF.zero_curvature_residual(minus, xi, zi, u, v, cfg.fd_step) for xi, zi in zip(x, z)), 1e-6)
        s.add(f"conjugate_inverse.{tag}", "conjugate-inversions",
              max(float(np.max(np.abs(AF.inversions_from_field(minus, xi, zi, opts) - fam.inverse(xi, zi))))
                  for xi, zi in zip(x, z)), 1e-8)
        s.add(f"structural.{tag}", "structural-equation",
              max(AF.structural_equation_residual(plus, xi, u, v, cfg.fd_step) for xi in x), 1e-5)
        w = 0.3 * v / np.linalg.norm(v)
        a9 = 0.0
        for xi in x:
            Ep, Em = AF.internal_geodesics(plus, minus, xi, w, 1.0, opts)
            Ep_neg, _ = AF.internal_geodesics(plus, minus, xi, -w, 1.0, opts)
            a9 = max(a9, float(np.max(np.abs(fam.s(xi, Em) - Ep_neg))))
        s.add(f"geodesic_inversion.{tag}", "internal-geodesic-inversion", a9, 1e-7)
        if isinstance(fam, AF.LinearFamily):
            a_p = plus.cartan(x[0])
            a_m = minus.cartan(x[0])
            s.add(f"conjugate_cartan.{tag}", "conjugate-cartan-field",
                  float(np.max(np.abs(a_m - a_p @ np.linalg.inv(a_p - np.eye(2))))), 1e-8)
            s.add(f"non_involutive_skew.{tag}", "involutivity-skew-symmetry",
                  max(AF.skew_symmetry_residual(fam, xi, zi) for xi, zi in zip(x, z)), 1e-2, ">")
        else:
            s.add(f"fundamental_skew.{tag}", "involutivity-skew-symmetry",
                  max(AF.skew_symmetry_residual(fam, xi, zi) for xi, zi in zip(x, z)), 1e-6)
    x = np.array([0.2, -0.1])
    s.add("connection.sphere-s2", "connection-from-inversions",
          float(np.max(np.abs(AF.fundamental_field(sphere).gamma(x) - sphere.gamma(x)))), 1e-5)
    flat = AF.fundamental_field(get_model("flat-r2"))
    L = np.array([[0.1, 1.0], [-0.7, 0.2]])
    t = cfg.times[0] if cfg.times else 0.5
    _, rep = AF.affine_translocate(flat, lambda X: X @ L.T, np.array([0.3, -0.2]), t,
                                   np.array([0.5, 0.1]), opts, du=lambda X: L)
    s.add("affine_factorization.flat-linear", "affine-translocation-factorization", rep["factorization"], 1e-6)
    s.add("affine_closed_form.flat-linear", "affine-monodromy-closed-form",
          rep.get("closed_form", np.inf), 1e-8, consistency=rep["consistency"])
    _, rep = AF.affine_translocate(AF.fundamental_field(sphere), _rotation_field, np.array([0.3, -0.2]), t,
                                   np.array([0.1, 0.2]), opts, du=_rotation_jacobian)
    s.add("affine_factorization.sphere-rotation", "affine-translocation-factorization",
          rep["factorization"], 1e-6)
    return s.records


def _rotation_field(X):
    return np.stack([-X[..., 1], X[..., 0]], -1)


def _rotation_jacobian(X):
    return np.array([[0.0, -1.0], [1.0, 0.0]])


# -- C10: determinism ----------------------------------------------------------------------

def suite_determinism(cfg):
    small = replace(cfg, samples=min(cfg.samples, 4), models=tuple(m for m in cfg.models) or ("flat-r2",))
    first = Report("check", small.as_dict(), suite_flat(small) + suite_translation(small)).to_json()
    second = Report("check", small.as_dict(), suite_flat(small) + suite_translation(small)).to_json()
    rec = CheckRecord("C10.byte_identical", "C10", "plumbing", float(first != second), 0.5, "<",
                      {"bytes": len(first)})
    return [rec]


SUITES = {
    "C1": suite_flat,
    "C2": suite_axioms,
    "C3": suite_translation,
    "C4": suite_paths,
    "C5": suite_groupoid,
    "C6": suite_curvature,
    "C7": suite_translocation,
    "C8": suite_phase,
    "C9": suite_affine,
    "C10": suite_determinism,
}


def run(subcommand, cfg, criteria=None):
    """Run the suites of ``subcommand`` (or the explicit ``criteria``)."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    chosen = tuple(criteria) if criteria else SUBCOMMANDS[subcommand]
    for c in chosen:
        if c not in SUITES:
            raise ConfigError(f"unknown criterion {c!r}; choose from {list(CRITERIA)}")
    records = []
    if cfg.models:
        for c in chosen:
            records.extend(SUITES[c](cfg))
    return Report(subcommand, cfg.as_dict(), records)

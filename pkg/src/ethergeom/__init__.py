"""Ether geometry: reflections, path diffeomorphisms, dynamic holonomy and
trajectory translocation on symplectic and affine manifolds, with closed-form
oracle models (flat space, the sphere and the hyperbolic plane)."""
from .affine import (
    InternalVectorField,
    InversiveStructure,
    LinearFamily,
    ReflectionFamily,
    affine_translocate,
    conjugate_field,
    field_from_inversions,
    fundamental_field,
    internal_geodesics,
    internal_translation,
    inversions_from_field,
)
from .dynamics import PathMap, ether_exponential, ether_translation, path_symplectomorphism
from .ether import EtherField, JetEther, LineIntegralEther, ether_flat, make_ether, reflection
from .holonomy import dynamic_holonomy, ether_curvature, holonomy_angle, kinematic_holonomy
from .models import ManifoldModel, flat_r2n, get_model, hyperbolic_h2, sphere_s2
from .numerics import DomainError, IntegrationError, IntegratorOptions
from .phase import generating_phase
from .translocation import HamiltonianSystem, TranslocatedSystem, get_hamiltonian, translocate

__version__ = "0.1.0"

__all__ = [
    "DomainError", "EtherField", "HamiltonianSystem", "IntegrationError", "IntegratorOptions",
    "InternalVectorField", "InversiveStructure", "JetEther", "LineIntegralEther", "LinearFamily",
    "ManifoldModel", "PathMap", "ReflectionFamily", "TranslocatedSystem", "affine_translocate",
    "conjugate_field", "dynamic_holonomy", "ether_curvature", "ether_exponential", "ether_flat",
    "ether_translation", "field_from_inversions", "flat_r2n", "fundamental_field", "generating_phase",
    "get_hamiltonian", "get_model", "holonomy_angle", "hyperbolic_h2", "internal_geodesics",
    "internal_translation", "inversions_from_field", "kinematic_holonomy", "make_ether",
    "path_symplectomorphism", "reflection", "sphere_s2", "translocate",
]

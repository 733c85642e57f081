#!/usr/bin/env python3
"""Affine (inversive) structures: reconstruct the internal field and connection from a
family of inversions, check the structural identities, and translocate a linear field."""
import numpy as np

from ethergeom import affine as AF
from ethergeom.models import sphere_s2


def main():
    rng = np.random.default_rng(0)
    families = {
        "linear rotation": AF.linear_family(),
        "twisted (torsion)": AF.TwistedFamily([[0.3, -0.2]]),
        "sphere reflections": AF.ReflectionFamily(sphere_s2()),
    }
    for name, fam in families.items():
        x = rng.uniform(-0.2, 0.2, 2)
        z = x + rng.uniform(-0.2, 0.2, 2)
        u, v = rng.normal(size=(2, 2))
        plus, minus = AF.field_from_inversions(fam), AF.conjugate_field(fam)
        s_err, A_err = AF.round_trip_residuals(fam, x, z)
        print(f"{name}")
        print(f"  round trip s / A          {s_err:.2e} / {A_err:.2e}")
        print(f"  zero curvature (+/-)      {AF.zero_curvature_residual(plus, x, z, u, v):.2e} / "
              f"{AF.zero_curvature_residual(minus, x, z, u, v):.2e}")
        print(f"  structural equation       {AF.structural_equation_residual(plus, x, u, v):.2e}")
        print(f"  skew symmetry             {AF.skew_symmetry_residual(fam, x, z):.2e}")
        print(f"  max |torsion|             {np.max(np.abs(plus.torsion(x))):.2e}")
    L = np.array([[0.1, 1.0], [-0.7, 0.2]])
    field = AF.field_from_inversions(families["twisted (torsion)"])
    Z, rep = AF.affine_translocate(field, lambda X: X @ L.T, np.array([0.1, -0.1]), 0.5,
                                   np.array([0.2, 0.1]), du=lambda X: L)
    print("linear field translocated on the twisted structure:")
    for k, v in sorted(rep.items()):
        print(f"  {k:<24}{v:.3e}")


if __name__ == "__main__":
    main()

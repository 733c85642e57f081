#!/usr/bin/env python3
"""Kinematic holonomy angle versus enclosed area on the sphere and the hyperbolic plane,
plus the small-loop expansion slope."""
import numpy as np

from ethergeom import holonomy as HL
from ethergeom.checks import RunConfig, _loop_enclosing, holonomy_sweep
from ethergeom.ether import make_ether
from ethergeom.models import get_model


def main():
    print(f"{'model':<15}{'area':>10}{'angle':>14}{'rel. error':>12}")
    for name in ("sphere-s2", "hyperbolic-h2"):
        model = get_model(name)
        field = make_ether(model)
        for area in (0.1, 0.05, 0.02, 0.01):
            loop = _loop_enclosing(model, area)
            enclosed = HL.symplectic_area(model, loop)
            angle = HL.holonomy_angle(field, loop)
            print(f"{name:<15}{enclosed:>10.4f}{angle:>14.8f}{abs(abs(angle) - enclosed) / enclosed:>12.2e}")
    print("\nsmall-loop expansion (remainder vs area)")
    for model, area, delta, slope in holonomy_sweep(RunConfig(models=("sphere-s2", "hyperbolic-h2"))):
        print(f"{model:<15}{area:>10.4f}{delta:>14.3e}   slope {slope:.3f}")


if __name__ == "__main__":
    np.set_printoptions(precision=6)
    main()

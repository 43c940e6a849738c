"""
Tour of the built-in instance families
======================================

Builds one instance from each generator and prints its shape, the true
best arm, and the gap structure that drives identification difficulty.
"""

import numpy as np

from fbbai.instances import (gen_adaptive_instance, gen_corner_instance,
                             gen_logistic_instance, gen_sphere_instance,
                             gen_static_instance)

rng = np.random.default_rng(7)

gallery = [
    ("adaptive", gen_adaptive_instance(5)),
    ("static", gen_static_instance(1.0, K=8)),
    ("sphere", gen_sphere_instance(8, 4, rng)),
    ("logistic", gen_logistic_instance(8, 4, rng)),
    ("corner", gen_corner_instance(6, rng)),
]

for label, inst in gallery:
    gaps = np.sort(inst.gaps)[1:]  # drop the best arm's zero gap
    print(f"{label:10s} K={inst.n_arms:2d} d={inst.dim:2d} model={inst.model}"
          f" best={inst.best_arm} delta_min={inst.delta_min:.4f}")
    print(f"{'':10s} means: {np.array2string(inst.means, precision=3)}")
    print(f"{'':10s} gaps:  {np.array2string(gaps, precision=3)}")

# the adaptive family hides a near-duplicate of the best arm: its smallest
# gap shrinks like omega^2/2 as the disturbing angle closes
for omega in (0.4, 0.2, 0.1, 0.05):
    inst = gen_adaptive_instance(5, omega=omega)
    print(f"omega={omega:<5} delta_min={inst.delta_min:.6f}"
          f" (omega^2/2 = {omega * omega / 2:.6f})")

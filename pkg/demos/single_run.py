"""
One elimination run, stage by stage
===================================

Runs successive elimination once on the adaptive instance and prints
what each stage saw: surviving arms, pull counts, and mean estimates.
The stage budget splits evenly, halving the active set each round.
"""

import numpy as np

from fbbai.gse import GseConfig, gse_run, stage_schedule
from fbbai.instances import gen_adaptive_instance

inst = gen_adaptive_instance(5, omega=0.6, sigma2=1.0)
config = GseConfig(budget=200, strategy="fw-g")

schedule = stage_schedule(inst.n_arms, config.eta, config.budget)
print(f"instance: K={inst.n_arms} d={inst.dim} best arm {inst.best_arm}")
print(f"schedule: {schedule.stages} stages of {schedule.per_stage_budget} pulls,"
      f" active sizes {schedule.sizes}")

result = gse_run(inst, config, np.random.default_rng(42))

for trace in result.traces:
    ids = list(trace.arms.original_ids)
    print(f"\nstage {trace.stage}: arms {ids}")
    print(f"  counts   : {trace.counts.tolist()}")
    print(f"  mu_hat   : {np.array2string(trace.mu_hat, precision=3)}")
    print(f"  survivors: {list(trace.survivors)}")
    if trace.design is not None:
        print(f"  design g : {trace.design.g_value:.3f}"
              f" certified={trace.design.certified}")

print(f"\nrecommended arm {result.recommended}"
      f" ({'correct' if result.success else 'wrong'}),"
      f" {result.total_pulls} pulls used")

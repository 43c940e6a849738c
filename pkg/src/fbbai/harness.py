"""Replicated evaluation: seeding, parallel Monte-Carlo, presets, CSV/JSON.

Every replication derives its own random stream from (master seed, family,
variant, budget, replication index), so results are identical no matter
how replications are split across worker processes.  Aborted replications
(any package error during a run) count as failures and are tallied
separately.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from .bounds import BoundInputs, bound_glm_gopt, bound_linear_gopt, oracle_c_min
from .errors import ConfigurationError, FbbaiError, UndefinedBoundError
from .gse import DesignCache, GseConfig, gse_run
from .instances import (BanditInstance, gen_adaptive_instance,
                        gen_corner_instance, gen_logistic_instance,
                        gen_sphere_instance, gen_static_instance)

InstanceSource = Union[BanditInstance, Callable[[np.random.Generator], BanditInstance]]

WORKERS_ENV = "FBBAI_WORKERS"

CSV_COLUMNS = ("family", "variant", "param_name", "param_value", "R",
               "successes", "accuracy", "stderr", "bound_delta", "aborts",
               "wall_time_s")


# ---------------------------------------------------------------------------
# Variants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VariantSpec:
    """Named algorithm configuration: allocation strategy plus fit model.

    A None model defers to the instance: logistic for logistic-mean GLM
    instances, linear otherwise.  A concrete model is deliberate, e.g. a
    misspecified linear fit on logistic rewards.
    """

    name: str
    strategy: str
    model: Optional[str] = None


VARIANTS: dict[str, VariantSpec] = {
    "gse-uniform": VariantSpec("gse-uniform", "uniform"),
    "gse-fwg": VariantSpec("gse-fwg", "fw-g"),
    "gse-fwd": VariantSpec("gse-fwd", "fw-d"),
    "gse-fwg-linear": VariantSpec("gse-fwg-linear", "fw-g", "linear"),
    "gse-fwg-logistic": VariantSpec("gse-fwg-logistic", "fw-g", "logistic"),
    "static-gopt": VariantSpec("static-gopt", "static", "linear"),
}


def _default_model(instance: BanditInstance) -> str:
    if instance.model == "glm" and instance.mean_fn.name == "logistic":
        return "logistic"
    return "linear"


# ---------------------------------------------------------------------------
# Seed derivation
# ---------------------------------------------------------------------------


def _token_int(token: object) -> int:
    digest = hashlib.sha256(repr(token).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def rep_seed(master: int, family: str, variant: str, budget: int,
             rep: int) -> np.random.SeedSequence:
    """Entropy for one replication, stable across chunkings and platforms."""
    return np.random.SeedSequence(
        [int(master) & 0xFFFFFFFF, _token_int(family), _token_int(variant),
         _token_int(int(budget)), int(rep)])


# ---------------------------------------------------------------------------
# Monte-Carlo core
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McResult:
    """Tally of one Monte-Carlo point."""

    replications: int
    successes: int
    aborts: int

    @property
    def accuracy(self) -> float:
        return self.successes / self.replications

    @property
    def stderr(self) -> float:
        p = self.accuracy
        return math.sqrt(p * (1.0 - p) / self.replications)


def _mc_chunk(args: tuple) -> tuple[int, int]:
    (source, strategy, model_override, variant_token, budget, eta, master,
     family_token, start, stop, forced, spend_rem, fw_tol) = args
    fixed = isinstance(source, BanditInstance)
    cache = DesignCache() if fixed else None
    successes = aborts = 0
    for r in range(start, stop):
        ss = rep_seed(master, family_token, variant_token, budget, r)
        inst_ss, run_ss = ss.spawn(2)
        try:
            inst = source if fixed else source(np.random.default_rng(inst_ss))
            model = model_override or _default_model(inst)
            config = GseConfig(budget=budget, eta=eta, strategy=strategy,
                               model=model, forced_exploration=forced,
                               spend_remainder=spend_rem, fw_tol=fw_tol)
            result = gse_run(inst, config, np.random.default_rng(run_ss), cache)
        except FbbaiError:
            aborts += 1
            continue
        successes += int(result.success)
    return successes, aborts


def resolve_workers(workers: Optional[int]) -> int:
    if workers is not None:
        return max(1, int(workers))
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def mc_accuracy(source: InstanceSource, variant: Union[str, VariantSpec],
                budget: int, replications: int, seed: int, *,
                family: str = "custom", eta: float = 2.0,
                workers: Optional[int] = None,
                forced_exploration: bool = False,
                spend_remainder: bool = False,
                fw_tol: float = 0.01) -> McResult:
    """Estimate best-arm accuracy over independent replications.

    ``source`` is a fixed instance or a generator taking an rng; fixed
    instances share one design cache per worker.  The result does not
    depend on ``workers``.
    """
    if replications < 1:
        raise ConfigurationError("need at least one replication")
    if isinstance(variant, str):
        if variant not in VARIANTS:
            raise ConfigurationError(
                f"unknown variant {variant!r}; choose from {sorted(VARIANTS)}")
        spec = VARIANTS[variant]
    else:
        spec = variant
    n_workers = resolve_workers(workers)

    def chunk_args(start: int, stop: int) -> tuple:
        return (source, spec.strategy, spec.model, spec.name, budget, eta,
                seed, family, start, stop, forced_exploration,
                spend_remainder, fw_tol)

    if n_workers == 1 or replications < 2 * n_workers:
        successes, aborts = _mc_chunk(chunk_args(0, replications))
        return McResult(replications, successes, aborts)
    bounds = np.linspace(0, replications, n_workers + 1).astype(int)
    successes = aborts = 0
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        for s, a in pool.map(_mc_chunk,
                             [chunk_args(int(lo), int(hi))
                              for lo, hi in zip(bounds[:-1], bounds[1:])]):
            successes += s
            aborts += a
    return McResult(replications, successes, aborts)


# ---------------------------------------------------------------------------
# Instance families
# ---------------------------------------------------------------------------


def _gen_sphere(rng: np.random.Generator, K: int, d: int,
                sigma2: float = 10.0) -> BanditInstance:
    return gen_sphere_instance(K, d, rng, sigma2=sigma2)


def _gen_logistic(rng: np.random.Generator, K: int, d: int) -> BanditInstance:
    return gen_logistic_instance(K, d, rng)


def _gen_corner(rng: np.random.Generator, K: int,
                sigma2: float = 1.0) -> BanditInstance:
    return gen_corner_instance(K, rng, sigma2=sigma2)


def family_source(family: str, params: dict) -> InstanceSource:
    """Fixed instance or picklable generator for a named family."""
    if family == "adaptive":
        return gen_adaptive_instance(**params)
    if family == "static":
        return gen_static_instance(**params)
    if family == "sphere":
        return partial(_gen_sphere, **params)
    if family == "logistic":
        return partial(_gen_logistic, **params)
    if family == "corner":
        return partial(_gen_corner, **params)
    raise ConfigurationError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    """One (instance family setting, variant, budget) cell of a sweep."""

    family_label: str
    family: str
    params: dict
    param_name: str
    param_value: float
    variant: str
    budget: int
    eta: float = 2.0


@dataclass(frozen=True)
class SweepRow:
    """One output record; column order follows CSV_COLUMNS."""

    family: str
    variant: str
    param_name: str
    param_value: float
    R: int
    successes: int
    accuracy: float
    stderr: float
    bound_delta: float
    aborts: int
    wall_time_s: float


@dataclass(frozen=True)
class SweepResult:
    name: str
    rows: tuple[SweepRow, ...]


@dataclass(frozen=True)
class Preset:
    name: str
    default_replications: int
    points: tuple[SweepPoint, ...]


def _build_presets() -> dict[str, Preset]:
    presets: dict[str, Preset] = {}
    trend_variants = ("gse-uniform", "gse-fwg", "gse-fwd", "static-gopt")

    pts = [SweepPoint("adaptive", "adaptive", {"d": 9}, "budget", float(B), v, B)
           for B in (300, 400, 500, 600) for v in trend_variants]
    presets["adaptive"] = Preset("adaptive", 1000, tuple(pts))

    pts = [SweepPoint("static", "static", {"delta": delta}, "delta", delta, v, 320)
           for delta in (0.5, 1.0, 2.0, 4.0, 8.0) for v in trend_variants]
    presets["static"] = Preset("static", 1000, tuple(pts))

    pts = [SweepPoint("sphere", "sphere", {"K": K, "d": 10}, "K", float(K),
                      v, 40 * K)
           for K in (8, 16, 32) for v in trend_variants]
    presets["sphere"] = Preset("sphere", 1000, tuple(pts))

    pts = [SweepPoint(f"logistic-d{d}", "logistic", {"K": 8, "d": d},
                      "budget_per_arm", float(bpa), v, 8 * bpa)
           for d in (5, 7, 10, 12) for bpa in (25, 50, 100)
           for v in ("gse-fwg", "gse-fwg-linear")]
    presets["logistic"] = Preset("logistic", 1000, tuple(pts))

    pts = [SweepPoint("corner", "corner", {"K": 10}, "budget", float(B), v, B)
           for B in (40, 80, 160, 320)
           for v in ("gse-uniform", "gse-fwg", "static-gopt")]
    presets["corner"] = Preset("corner", 1000, tuple(pts))
    return presets


PRESETS = _build_presets()


def bound_for_source(source: InstanceSource, budget: int,
                     eta: float) -> float:
    """Closed-form error bound for a fixed instance; NaN when undefined.

    Randomized families have no single bound value, so generators give NaN.
    """
    if not isinstance(source, BanditInstance):
        return float("nan")
    try:
        if source.model == "linear":
            inputs = BoundInputs(K=source.n_arms, d=source.dim, eta=eta,
                                 sigma2=source.noise_sigma2,
                                 delta_min=source.delta_min, budget=budget)
            return bound_linear_gopt(inputs)
        inputs = BoundInputs(K=source.n_arms, d=source.dim, eta=eta,
                             sigma2=source.noise_sigma2,
                             delta_min=source.linear_delta_min, budget=budget,
                             c_min=oracle_c_min(source))
        return bound_glm_gopt(inputs)
    except UndefinedBoundError:
        return float("nan")


def run_point(point: SweepPoint, replications: int, seed: int,
              workers: Optional[int] = None) -> SweepRow:
    source = family_source(point.family, point.params)
    start = time.perf_counter()
    res = mc_accuracy(source, point.variant, point.budget, replications, seed,
                      family=point.family_label, eta=point.eta,
                      workers=workers)
    wall = time.perf_counter() - start
    return SweepRow(family=point.family_label, variant=point.variant,
                    param_name=point.param_name, param_value=point.param_value,
                    R=replications, successes=res.successes,
                    accuracy=res.accuracy, stderr=res.stderr,
                    bound_delta=bound_for_source(source, point.budget, point.eta),
                    aborts=res.aborts, wall_time_s=wall)


def run_preset(name: str, out_dir: Optional[str] = None,
               replications: Optional[int] = None, seed: int = 0,
               workers: Optional[int] = None) -> SweepResult:
    """Run every point of a named preset; optionally write CSV and JSON."""
    if name not in PRESETS:
        raise ConfigurationError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    preset = PRESETS[name]
    R = preset.default_replications if replications is None else replications
    rows = tuple(run_point(p, R, seed, workers) for p in preset.points)
    result = SweepResult(name=name, rows=rows)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / f"{name}.csv", rows)
        write_json(out / f"{name}.json", rows)
    return result


# ---------------------------------------------------------------------------
# Output formats
# ---------------------------------------------------------------------------


def _format_cell(value: object) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.12g}"
    return str(value)


def format_csv(rows, include_wall_time: bool = True) -> str:
    cols = CSV_COLUMNS if include_wall_time else CSV_COLUMNS[:-1]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_format_cell(getattr(row, c)) for c in cols])
    return buf.getvalue()


def format_json(rows, include_wall_time: bool = True) -> str:
    cols = CSV_COLUMNS if include_wall_time else CSV_COLUMNS[:-1]
    records = []
    for row in rows:
        rec = {}
        for c in cols:
            v = getattr(row, c)
            if isinstance(v, float) and math.isnan(v):
                v = None
            rec[c] = v
        records.append(rec)
    return json.dumps(records, indent=2) + "\n"


def write_csv(path, rows, include_wall_time: bool = True) -> None:
    """Write sweep rows; wall time is excludable so outputs can be diffed."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(format_csv(rows, include_wall_time))


def write_json(path, rows, include_wall_time: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_json(rows, include_wall_time))


def read_csv(path) -> list[dict]:
    """Read a sweep CSV back into dicts of strings (as written)."""
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))

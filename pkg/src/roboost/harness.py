"""Experiment definitions, trial orchestration and summary statistics for the synthetic testbed."""

import csv
import dataclasses
import json
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boosting import BoostConfig, dc_sgd_path, rv_sgd_ave_path, rv_sgd_cv_path
from .merge_rules import MERGE_KINDS, MergeRule
from .rgd_baselines import BASELINES, BaselineConfig, run_baseline
from .robust_scalar import VALIDATOR_KINDS, Validator
from .sgd_engine import StepSchedule, checkpoint_grid
from .synthetic import CURVATURES, NOISE_FAMILIES, NoiseModel, make_problem
from .vecmath import FeasibleSet

METHODS = ("erm-gd", "sgd", "rgd-mom", "rgd-m", "rgd-lec", "dc-sgd", "rv-sgd", "rv-sgdave",
           "rv-sgd-cv", "rv-sgdave-cv")
EXPERIMENTS = ("SC-E1", "SC-E2", "SC-E3", "SC-E4", "SC-E5", "NC-E1", "NC-E2", "NC-E3", "NC-E4")
SCALES = ("desk", "paper")
INIT_MODES = ("raw", "scaled")
SCHEDULES = ("constant", "inverse_t", "horizon")

RECORD_HEADER = ["experiment", "method", "trial", "cost", "excess_risk", "elapsed_s"]
SUMMARY_HEADER = ["experiment", "method", "cost", "mean", "sd", "median", "q1", "q3", "med_elapsed_s"]

BATCH_STEP = 0.1
SEQ_STEP = 0.01
DESK_MAX_TRIALS = 25
DESK_MAX_D = 128


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the first offending entry."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class MethodSpec:
    """One learner inside an experiment.

    ``step`` is divided by sqrt(d) when ``step_sqrt_d`` is set. ``schedule``
    selects the step rule; the non-constant ones read their curvature
    constants off the problem instance (``a`` comes from ``step``).
    Budget fields left as None inherit the experiment's.
    """

    name: str
    step: float = SEQ_STEP
    step_sqrt_d: bool = True
    schedule: str = "constant"
    budget_factor: Optional[float] = None
    budget_sqrt_d: Optional[bool] = None
    merge: str = "geomed"
    validator: str = "catoni"
    delta: float = 0.05

    def step_size(self, d):
        return self.step / math.sqrt(d) if self.step_sqrt_d else self.step


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str = "SC-E1"
    d: int = 2
    n: int = 500
    noise: NoiseModel = field(default_factory=NoiseModel)
    curvature: str = "identity"
    trials: int = 25
    budget_factor: float = 40.0
    budget_sqrt_d: bool = True
    methods: tuple = ()
    init_scale: float = 5.0
    init_mode: str = "raw"
    k: int = 10
    master_seed: int = 0
    radius: float = 1e6
    shuffle: bool = False
    per_decade: int = 20
    sweep: tuple = ()

    def budget(self, spec=None, n=None, d=None):
        n = self.n if n is None else n
        d = self.d if d is None else d
        factor = self.budget_factor
        sqrt_d = self.budget_sqrt_d
        if spec is not None and spec.budget_factor is not None:
            factor = spec.budget_factor
        if spec is not None and spec.budget_sqrt_d is not None:
            sqrt_d = spec.budget_sqrt_d
        return int(math.floor(factor * n * (math.sqrt(d) if sqrt_d else 1.0) + 1e-9))

    def variants(self):
        """Concrete configs, one per sweep entry (or just this one)."""
        if not self.sweep:
            return [self]
        out = []
        for over in self.sweep:
            over = dict(over)
            if "noise" in over and isinstance(over["noise"], dict):
                over["noise"] = NoiseModel(**over["noise"])
            tag = ",".join(f"{key}={_tag_value(v)}" for key, v in sorted(over.items()))
            out.append(dataclasses.replace(self, sweep=(), experiment_id=f"{self.experiment_id}/{tag}",
                                           **over))
        return out

    def to_dict(self):
        out = dataclasses.asdict(self)
        out["methods"] = [dataclasses.asdict(m) for m in self.methods]
        out["sweep"] = [_jsonable(s) for s in self.sweep]
        return out


def _tag_value(v):
    if isinstance(v, NoiseModel):
        return f"{v.family}:{v.b:g}"
    if isinstance(v, float):
        return f"{v:g}"
    return str(v)


def _jsonable(obj):
    if isinstance(obj, NoiseModel):
        return obj.to_dict()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    return obj


# ---------------------------------------------------------------------------
# validation and parsing
# ---------------------------------------------------------------------------


def _positive_int(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise ConfigError(name, f"expected a positive integer, got {value!r}")
    return int(value)


def _positive_real(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not (value > 0 and math.isfinite(value)):
        raise ConfigError(name, f"expected a positive number, got {value!r}")
    return float(value)


def _noise_from(obj, name="noise"):
    if isinstance(obj, NoiseModel):
        return obj
    if not isinstance(obj, dict):
        raise ConfigError(name, "expected an object with 'family' and 'b'")
    unknown = set(obj) - {"family", "b"}
    if unknown:
        raise ConfigError(f"{name}.{sorted(unknown)[0]}", "unknown field")
    fam = obj.get("family", "lognormal")
    if fam not in NOISE_FAMILIES:
        raise ConfigError(f"{name}.family", f"expected one of {NOISE_FAMILIES}, got {fam!r}")
    b = obj.get("b", 1.75)
    if isinstance(b, bool) or not isinstance(b, (int, float)) or not (b >= 0 and math.isfinite(b)):
        raise ConfigError(f"{name}.b", f"expected a non-negative number, got {b!r}")
    return NoiseModel(fam, float(b))


def _method_from(obj, i):
    name = f"methods[{i}]"
    if isinstance(obj, str):
        obj = {"name": obj}
    if not isinstance(obj, dict):
        raise ConfigError(name, "expected a method name or object")
    known = {f.name for f in dataclasses.fields(MethodSpec)}
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"{name}.{sorted(unknown)[0]}", "unknown field")
    if obj.get("name") not in METHODS:
        raise ConfigError(f"{name}.name", f"unknown method {obj.get('name')!r}; expected one of {METHODS}")
    spec = dict(obj)
    if "step" in spec:
        spec["step"] = _positive_real(spec["step"], f"{name}.step")
    if spec.get("schedule", "constant") not in SCHEDULES:
        raise ConfigError(f"{name}.schedule", f"expected one of {SCHEDULES}")
    if spec.get("budget_factor") is not None:
        spec["budget_factor"] = _positive_real(spec["budget_factor"], f"{name}.budget_factor")
    if spec.get("merge", "geomed") not in MERGE_KINDS:
        raise ConfigError(f"{name}.merge", f"expected one of {MERGE_KINDS}")
    if spec.get("validator", "catoni") not in VALIDATOR_KINDS:
        raise ConfigError(f"{name}.validator", f"expected one of {VALIDATOR_KINDS}")
    delta = spec.get("delta", 0.05)
    if not isinstance(delta, (int, float)) or not 0.0 < delta < 1.0:
        raise ConfigError(f"{name}.delta", f"expected a number in (0, 1), got {delta!r}")
    for flag in ("step_sqrt_d", "budget_sqrt_d"):
        if spec.get(flag) is not None and not isinstance(spec[flag], bool):
            raise ConfigError(f"{name}.{flag}", "expected true or false")
    return MethodSpec(**spec)


def config_from_dict(obj):
    """Build and validate an :class:`ExperimentConfig` from parsed JSON."""
    if not isinstance(obj, dict):
        raise ConfigError("config", "expected a JSON object")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")
    kw = dict(obj)
    eid = kw.get("experiment_id", "SC-E1")
    if not isinstance(eid, str) or not eid:
        raise ConfigError("experiment_id", "expected a non-empty string")
    for name in ("d", "n", "trials", "k", "per_decade"):
        if name in kw:
            kw[name] = _positive_int(kw[name], name)
    for name in ("budget_factor", "init_scale", "radius"):
        if name in kw:
            kw[name] = _positive_real(kw[name], name)
    if "master_seed" in kw and (isinstance(kw["master_seed"], bool)
                                or not isinstance(kw["master_seed"], int) or kw["master_seed"] < 0):
        raise ConfigError("master_seed", "expected a non-negative integer")
    for name in ("budget_sqrt_d", "shuffle"):
        if name in kw and not isinstance(kw[name], bool):
            raise ConfigError(name, "expected true or false")
    if "noise" in kw:
        kw["noise"] = _noise_from(kw["noise"])
    if kw.get("curvature", "identity") not in CURVATURES:
        raise ConfigError("curvature", f"expected one of {CURVATURES}")
    if kw.get("init_mode", "raw") not in INIT_MODES:
        raise ConfigError("init_mode", f"expected one of {INIT_MODES}")
    methods = kw.get("methods", [])
    if not isinstance(methods, (list, tuple)) or not methods:
        raise ConfigError("methods", "expected a non-empty list")
    kw["methods"] = tuple(_method_from(m, i) for i, m in enumerate(methods))
    sweep = kw.get("sweep", [])
    if not isinstance(sweep, (list, tuple)):
        raise ConfigError("sweep", "expected a list of override objects")
    allowed = {"d", "n", "noise", "init_scale", "trials", "curvature", "k"}
    clean = []
    for i, over in enumerate(sweep):
        if not isinstance(over, dict) or not over:
            raise ConfigError(f"sweep[{i}]", "expected a non-empty object")
        bad = set(over) - allowed
        if bad:
            raise ConfigError(f"sweep[{i}].{sorted(bad)[0]}", f"only {sorted(allowed)} may be swept")
        o = dict(over)
        for name in ("d", "n", "trials", "k"):
            if name in o:
                o[name] = _positive_int(o[name], f"sweep[{i}].{name}")
        if "init_scale" in o:
            o["init_scale"] = _positive_real(o["init_scale"], f"sweep[{i}].init_scale")
        if "noise" in o:
            o["noise"] = _noise_from(o["noise"], f"sweep[{i}].noise")
        if o.get("curvature", "identity") not in CURVATURES:
            raise ConfigError(f"sweep[{i}].curvature", f"expected one of {CURVATURES}")
        clean.append(o)
    kw["sweep"] = tuple(clean)
    cfg = ExperimentConfig(**kw)
    for v in cfg.variants():
        _check_variant(v)
    return cfg


def _check_variant(cfg):
    names = [m.name for m in cfg.methods]
    if len(set(names)) != len(names):
        raise ConfigError("methods", "duplicate method name")
    half = cfg.n // 2
    for i, m in enumerate(cfg.methods):
        budget = cfg.budget(m, d=cfg.d)
        if m.name in ("erm-gd", "rgd-mom", "rgd-m") and budget < cfg.n:
            raise ConfigError(f"methods[{i}].budget_factor", "budget smaller than one full-batch step")
        if budget < 1:
            raise ConfigError(f"methods[{i}].budget_factor", "budget below one gradient")
        if m.name in ("rgd-mom", "rgd-lec", "dc-sgd", "rv-sgd-cv", "rv-sgdave-cv") and cfg.k > cfg.n:
            raise ConfigError("k", f"k={cfg.k} exceeds n={cfg.n}")
        if m.name in ("rv-sgd", "rv-sgdave") and cfg.k > half:
            raise ConfigError("k", f"k={cfg.k} exceeds the training half n/2={half}")
        if m.name in ("rv-sgd-cv", "rv-sgdave-cv") and cfg.k < 2:
            raise ConfigError("k", "cross-validation variants need k >= 2")


def load_config(path):
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return config_from_dict(obj)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------


def _batch(*names, **kw):
    return tuple(MethodSpec(nm, step=BATCH_STEP, **kw) for nm in names)


def _seq(*names, **kw):
    return tuple(MethodSpec(nm, step=SEQ_STEP, **kw) for nm in names)


def _pow2(lo, hi):
    out, v = [], lo
    while v <= hi:
        out.append(v)
        v *= 2
    return out


def default_noise(family="lognormal"):
    """Noise levels with roughly matched inter-quartile widths."""
    return NoiseModel("normal", 2.2) if family == "normal" else NoiseModel("lognormal", 1.75)


NOISE_LEVELS = {"normal": (1.5, 2.2, 2.4), "lognormal": (1.25, 1.75, 1.90)}


def preset(experiment_id, scale="desk", noise="lognormal"):
    """Paper-scale or desk-scale configuration of one of the named experiments."""
    eid = str(experiment_id).upper()
    if eid not in EXPERIMENTS:
        raise ConfigError("preset", f"unknown preset {experiment_id!r}; expected one of "
                          f"{[e.lower() for e in EXPERIMENTS]}")
    if scale not in SCALES:
        raise ConfigError("scale", f"expected one of {SCALES}, got {scale!r}")
    if noise not in NOISE_FAMILIES:
        raise ConfigError("noise", f"expected one of {NOISE_FAMILIES}, got {noise!r}")
    nm = default_noise(noise)
    batch4 = _batch("erm-gd", "rgd-mom", "rgd-m", "rgd-lec")
    few_pass = dict(budget_factor=2.0, budget_sqrt_d=False)
    e2_d = [{"d": d} for d in _pow2(2, 1024)]
    e3_sweep = [{"d": d, "n": 4000 * d} for d in _pow2(2, 64)] + e2_d

    if eid == "SC-E1":
        cfg = ExperimentConfig(eid, 2, 500, nm, "identity", 100, 40.0, True,
                               batch4 + _seq("sgd", "dc-sgd"))
    elif eid == "SC-E2":
        cfg = ExperimentConfig(eid, 2, 2500, nm, "identity", 250, 100.0, False,
                               batch4 + _seq("dc-sgd", **few_pass), init_mode="scaled",
                               sweep=tuple(e2_d + [{"d": 16, "n": 64000}]))
    elif eid == "SC-E3":
        cfg = ExperimentConfig(eid, 2, 2500, nm, "identity", 250, 100.0, False,
                               batch4 + _seq("dc-sgd", **few_pass), init_mode="scaled",
                               sweep=tuple(e3_sweep))
    elif eid == "SC-E4":
        cfg = ExperimentConfig(eid, 2, 500, nm, "identity", 100, 40.0, True,
                               _batch("erm-gd", "rgd-mom") + _seq("sgd", "dc-sgd"),
                               sweep=tuple({"init_scale": c} for c in (2.5, 5.0, 10.0)))
    elif eid == "SC-E5":
        cfg = ExperimentConfig(eid, 2, 500, nm, "identity", 100, 40.0, True,
                               _batch("erm-gd", "rgd-mom") + _seq("sgd", "dc-sgd"),
                               sweep=tuple({"noise": NoiseModel(noise, b)} for b in NOISE_LEVELS[noise]))
    elif eid == "NC-E1":
        cfg = ExperimentConfig(eid, 2, 500, nm, "identity", 100, 40.0, True,
                               batch4 + _seq("sgd", "rv-sgd", "rv-sgdave"))
    elif eid == "NC-E2":
        cfg = ExperimentConfig(eid, 2, 2500, nm, "halfflat", 250, 100.0, False,
                               batch4 + _seq("rv-sgdave", **few_pass), init_mode="scaled",
                               sweep=tuple(e2_d))
    elif eid == "NC-E3":
        cfg = ExperimentConfig(eid, 2, 2500, nm, "halfflat", 250, 100.0, False,
                               batch4 + _seq("rv-sgdave", **few_pass), init_mode="scaled",
                               sweep=tuple(e3_sweep))
    else:
        cfg = ExperimentConfig(eid, 2, 500, nm, "identity", 100, 40.0, True,
                               _seq("rv-sgd", "rv-sgdave", "rv-sgd-cv", "rv-sgdave-cv"))
    if scale == "desk":
        cfg = desk_scale(cfg)
    return cfg


def desk_scale(cfg, max_trials=DESK_MAX_TRIALS, max_d=DESK_MAX_D):
    """Cap trials and dimension; budgets, k and step sizes keep their ratios."""
    sweep = tuple(s for s in cfg.sweep if s.get("d", cfg.d) <= max_d)
    sweep = tuple(dict(s, trials=min(s["trials"], max_trials)) if "trials" in s else s for s in sweep)
    return dataclasses.replace(cfg, trials=min(cfg.trials, max_trials), d=min(cfg.d, max_d), sweep=sweep)


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialRecord:
    experiment: str
    method: str
    trial: int
    cost: int
    excess_risk: float
    elapsed_s: float

    def row(self):
        return [self.experiment, self.method, self.trial, self.cost, repr(float(self.excess_risk)),
                f"{self.elapsed_s:.6f}"]


def trial_seed(master_seed, experiment_id, trial):
    """Independent stream per (master seed, experiment, trial)."""
    return np.random.SeedSequence([int(master_seed), zlib.crc32(experiment_id.encode()), int(trial)])


def _schedule(spec, problem):
    d = problem.d
    if spec.schedule == "constant":
        return StepSchedule.constant(spec.step_size(d))
    lam = 2.0 * float(problem.sigma_diag.min())
    if spec.schedule == "inverse_t":
        return StepSchedule.inverse_t(lam)
    return StepSchedule.horizon(spec.step_size(d), lam, float(np.sum(6.0 * problem.sigma_diag)))


def run_method(spec, cfg, problem, w0, seed):
    """Path ``[(cost, w), ...]`` of one method on one problem instance."""
    feasible = FeasibleSet.ball(problem.d, cfg.radius)
    budget = cfg.budget(spec, n=problem.n, d=problem.d)
    grid = checkpoint_grid(budget, cfg.per_decade)
    name = spec.name
    if name in BASELINES:
        bc = BaselineConfig(name, spec.step_size(problem.d), cfg.k, spec.delta, cfg.shuffle)
        return run_baseline(bc, problem.oracle(), w0, budget, feasible, grid, seed)
    sched = _schedule(spec, problem)
    validator = Validator(spec.validator, spec.delta)
    if name == "dc-sgd":
        bcfg = BoostConfig(cfg.k, MergeRule(spec.merge))
        return dc_sgd_path(problem.oracle(), w0, bcfg, sched, feasible, budget, grid, cfg.shuffle, seed)
    average = name in ("rv-sgdave", "rv-sgdave-cv")
    bcfg = BoostConfig(cfg.k, validator=validator, average=average, cv=name.endswith("-cv"))
    if bcfg.cv:
        return rv_sgd_cv_path(problem.oracle(), w0, bcfg, sched, feasible, budget, grid, cfg.shuffle, seed)
    half = problem.n // 2
    train = problem.oracle(slice(0, half))
    valid = problem.oracle(slice(half, problem.n))
    return rv_sgd_ave_path(train, valid, w0, bcfg, sched, feasible, budget, grid, cfg.shuffle, seed)


def initial_point(cfg, problem, rng):
    c = cfg.init_scale / (math.sqrt(problem.d) if cfg.init_mode == "scaled" else 1.0)
    return problem.w_star + rng.uniform(-c, c, size=problem.d)


def run_trial(cfg, trial):
    """All methods of one trial on one freshly drawn problem instance."""
    ss = trial_seed(cfg.master_seed, cfg.experiment_id, trial)
    prob_ss, init_ss, method_ss = ss.spawn(3)
    problem = make_problem(cfg.d, cfg.n, cfg.curvature, cfg.noise, seed=prob_ss)
    w0 = initial_point(cfg, problem, np.random.default_rng(init_ss))
    records = []
    for spec, mss in zip(cfg.methods, method_ss.spawn(len(cfg.methods))):
        t0 = time.perf_counter()
        try:
            path = run_method(spec, cfg, problem, w0.copy(), mss)
        except (ValueError, ArithmeticError):
            records.append(TrialRecord(cfg.experiment_id, spec.name, trial, -1, math.nan, math.nan))
            continue
        elapsed = time.perf_counter() - t0
        records.extend(TrialRecord(cfg.experiment_id, spec.name, trial, int(c), problem.excess_risk(w),
                                   elapsed) for c, w in path)
    return records


def _run_task(args):
    cfg, trial = args
    return run_trial(cfg, trial)


def _sort_key(cfg_order, method_order):
    def key(r):
        return (cfg_order[r.experiment], method_order.get(r.method, len(method_order)), r.trial, r.cost)
    return key


def run_experiment(cfg, workers=1):
    """Run every (variant, trial) pair; the record list is sorted and independent of ``workers``."""
    variants = cfg.variants()
    tasks = [(v, t) for v in variants for t in range(v.trials)]
    if workers <= 1 or len(tasks) <= 1:
        chunks = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=int(workers)) as pool:
            chunks = list(pool.map(_run_task, tasks))
    records = [r for chunk in chunks for r in chunk]
    cfg_order = {v.experiment_id: i for i, v in enumerate(variants)}
    method_order = {m.name: i for i, m in enumerate(cfg.methods)}
    records.sort(key=_sort_key(cfg_order, method_order))
    return records


# ---------------------------------------------------------------------------
# statistics and I/O
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SummaryRow:
    experiment: str
    method: str
    cost: int
    mean: float
    sd: float
    median: float
    q1: float
    q3: float
    med_elapsed_s: float
    count: int
    sd_defined: bool

    def row(self):
        return [self.experiment, self.method, self.cost] + [repr(float(x)) for x in
                (self.mean, self.sd, self.median, self.q1, self.q3, self.med_elapsed_s)]


def summarize(records):
    """Mean, sd (n - 1 denominator), median and quartiles per (experiment, method, cost).

    A group with one record reports sd = 0 with ``sd_defined=False``.
    Failure rows (cost -1) form their own group with NaN statistics.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to summarize")
    groups = {}
    for r in records:
        groups.setdefault((r.experiment, r.method, r.cost), []).append(r)
    out = []
    for (exp, meth, cost), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])):
        x = np.sort(np.array([r.excess_risk for r in rs], dtype=np.float64))
        el = np.array([r.elapsed_s for r in rs], dtype=np.float64)
        m = x.shape[0]
        sd = float(np.std(x, ddof=1)) if m > 1 else 0.0
        q1, med, q3 = (float(v) for v in np.percentile(x, [25, 50, 75]))
        out.append(SummaryRow(exp, meth, int(cost), float(np.mean(x)), sd, med, q1, q3,
                              float(np.median(el)), m, m > 1))
    return out


def final_values(records, experiment=None):
    """Excess risk at the last checkpoint of each (method, trial) series, as ``{method: array}``."""
    last = {}
    for r in records:
        if experiment is not None and r.experiment != experiment:
            continue
        key = (r.method, r.trial)
        if key not in last or r.cost > last[key].cost:
            last[key] = r
    out = {}
    for (meth, _), r in sorted(last.items()):
        out.setdefault(meth, []).append(r.excess_risk)
    return {m: np.array(v) for m, v in out.items()}


def final_costs(records, experiment=None):
    out = {}
    for r in records:
        if experiment is None or r.experiment == experiment:
            out[r.method] = max(out.get(r.method, 0), r.cost)
    return out


def write_records(path, records):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_HEADER)
        for r in records:
            w.writerow(r.row())


def read_records(path):
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        return [TrialRecord(r["experiment"], r["method"], int(r["trial"]), int(r["cost"]),
                            float(r["excess_risk"]), float(r["elapsed_s"])) for r in rd]


def write_summary(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_HEADER)
        for r in rows:
            w.writerow(r.row())

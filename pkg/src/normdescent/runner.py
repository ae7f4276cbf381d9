"""Experiment harness: config parsing, training loop, diagnostics logging.

A run trains one (model, optimizer, schedule) triple per seed until the loss
target or step cap is hit, logging a diagnostics row every ``log_every``
steps and at termination, and tracking cheap per-step monitors (soft margin,
parameter alignment, path ratio) whose tail statistics land in the JSON
summary. A sweep runs several optimizers over shared seeds and aggregates
final margins with normal-approximation confidence intervals.
"""

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from . import data, ema, losses, metrics, models, norms, optimizers

CSV_SCHEMA_VERSION = "normdescent-diag-v1"

# A soft-margin decrease beyond SOFT_MARGIN_TOL * (1 + |value|) between
# consecutive steps counts as a monotonicity violation in the summary.
SOFT_MARGIN_TOL = 1e-6

# Threshold defining the significant-coordinate set for the Adam
# sign-agreement statistic.
ADAM_SIGN_THRESHOLD = 0.1

_NORM_SCHEMA = {
    "type": "object",
    "properties": {"kind": {"enum": ["l1", "l2", "linf", "spectral_per_matrix"]}},
    "required": ["kind"],
    "additionalProperties": False,
}

_SCHEDULE_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["constant", "power_decay"]},
        "eta0": {"type": "number", "exclusiveMinimum": 0},
        "exponent": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "t_init": {"type": "number", "minimum": 1},
    },
    "required": ["kind", "eta0"],
    "additionalProperties": False,
}

_OPTIMIZER_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["sd", "msd", "adam", "muon_adam"]},
        "norm": _NORM_SCHEMA,
        "normalized": {"type": "boolean"},
        "c1": {"type": "number", "exclusiveMinimum": 0},
        "c2": {"type": "number", "exclusiveMinimum": 0},
        "c_matrix": {"type": "number", "exclusiveMinimum": 0},
        "eps": {"type": "number", "minimum": 0},
        "eta0_matrix": {"type": "number", "exclusiveMinimum": 0},
        "eta0_vector": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "extends": {"type": "string"},
        "name": {"type": "string"},
        "model": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["linear", "two_layer"]},
                "dim": {"type": "integer", "minimum": 1},
                "hidden": {"type": "integer", "minimum": 1},
                "activation_power": {"type": "number", "minimum": 1},
                "output_as_matrix": {"type": "boolean"},
            },
            "required": ["kind", "dim"],
            "additionalProperties": False,
        },
        "loss": {
            "type": "object",
            "properties": {"kind": {"enum": ["exponential", "logistic"]}},
            "required": ["kind"],
            "additionalProperties": False,
        },
        "dataset": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["synth_separable", "mnist_even_odd"]},
                "m": {"type": "integer", "minimum": 2},
                "d": {"type": "integer", "minimum": 2},
                "margin_floor": {"type": "number", "exclusiveMinimum": 0},
                "images": {"type": "string"},
                "labels": {"type": "string"},
                "cache_dir": {"type": "string"},
            },
            "required": ["kind", "m"],
            "additionalProperties": False,
        },
        "optimizer": _OPTIMIZER_SCHEMA,
        "optimizers": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "name": {"type": "string"},
                    "optimizer": _OPTIMIZER_SCHEMA,
                    "schedule": _SCHEDULE_SCHEMA,
                },
                "required": ["name", "optimizer"],
                "additionalProperties": False,
            },
        },
        "margin_norms": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"name": {"type": "string"}, "kind": _NORM_SCHEMA["properties"]["kind"]},
                "required": ["name", "kind"],
                "additionalProperties": False,
            },
        },
        "schedule": _SCHEDULE_SCHEMA,
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "stop": {
            "type": "object",
            "properties": {
                "loss_target": {"type": "number", "exclusiveMinimum": 0},
                "max_steps": {"type": "integer", "minimum": 0},
            },
            "required": ["loss_target", "max_steps"],
            "additionalProperties": False,
        },
        "log_every": {"type": "integer", "minimum": 1},
        "seeds": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
        "init_scale": {"type": "number", "exclusiveMinimum": 0},
        "kkt_checkpoints": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
        "output_dir": {"type": "string"},
    },
    "required": ["model", "loss", "dataset", "schedule", "stop", "log_every", "seeds"],
    "additionalProperties": False,
}


class ConfigError(ValueError):
    pass


class DivergenceMonitor:
    """Warns when the loss fails to decrease for ``patience`` consecutive steps
    after first dropping below the interpolation threshold ell(0)."""

    def __init__(self, ell0, patience):
        self.ell0 = ell0
        self.patience = patience
        self.active = False
        self.streak = 0
        self.warned = False
        self._last = None

    def update(self, loss):
        if not self.active and loss < self.ell0:
            self.active = True
            self._last = loss
            return self.warned
        if self.active:
            if self._last is not None and loss >= self._last:
                self.streak += 1
                if self.streak >= self.patience:
                    self.warned = True
            else:
                self.streak = 0
            self._last = loss
        return self.warned


def load_config(path):
    """Load a JSON config, resolving a chain of ``extends`` keys, and validate."""
    path = Path(path)
    merged = {}
    chain = []
    current = path
    for _ in range(10):
        raw = json.loads(current.read_text())
        chain.append((current, raw))
        parent = raw.get("extends")
        if parent is None:
            break
        current = (current.parent / parent).resolve()
    else:
        raise ConfigError(f"extends chain too deep starting at {path}")
    for _, raw in reversed(chain):
        raw = dict(raw)
        raw.pop("extends", None)
        merged.update(raw)
    try:
        jsonschema.validate(merged, CONFIG_SCHEMA)
    except jsonschema.ValidationError as err:
        raise ConfigError(f"{path}: {err.message}") from err
    if "optimizer" not in merged and "optimizers" not in merged:
        raise ConfigError(f"{path}: need 'optimizer' (run) or 'optimizers' (sweep)")
    return merged


def build_model(cfg):
    if cfg["kind"] == "linear":
        return models.Linear(dim=cfg["dim"])
    return models.TwoLayer(
        dim=cfg["dim"],
        hidden=cfg["hidden"],
        activation_power=cfg.get("activation_power", 2.0),
    )


def build_loss(cfg):
    return losses.Exponential() if cfg["kind"] == "exponential" else losses.Logistic()


def build_norm(cfg):
    return {
        "l1": norms.L1,
        "l2": norms.L2,
        "linf": norms.Linf,
        "spectral_per_matrix": norms.SpectralPerMatrix,
    }[cfg["kind"]]()


def build_schedule(cfg):
    if cfg["kind"] == "constant":
        return optimizers.Constant(eta0=cfg["eta0"])
    return optimizers.PowerDecay(
        eta0=cfg["eta0"], exponent=cfg.get("exponent", 0.8), t_init=cfg.get("t_init", 1.0)
    )


def build_optimizer(cfg, layout):
    """Build (spec, implied margin norm) from an optimizer config block."""
    kind = cfg["kind"]
    if kind == "sd":
        spec = optimizers.SD(norm=build_norm(cfg["norm"]), normalized=cfg.get("normalized", True))
    elif kind == "msd":
        spec = optimizers.MSD(
            norm=build_norm(cfg["norm"]),
            c1=cfg.get("c1", ema.C1_DEFAULT),
            normalized=cfg.get("normalized", True),
        )
    elif kind == "adam":
        spec = optimizers.Adam(
            c1=cfg.get("c1", ema.C1_DEFAULT),
            c2=cfg.get("c2", ema.C2_DEFAULT),
            eps=cfg.get("eps", 1e-20),
        )
    elif kind == "muon_adam":
        return optimizers.build_muon_adam(
            layout,
            eta0_matrix=cfg["eta0_matrix"],
            eta0_vector=cfg["eta0_vector"],
            c_matrix=cfg.get("c_matrix", ema.C1_DEFAULT),
            c1=cfg.get("c1", ema.C1_DEFAULT),
            c2=cfg.get("c2", ema.C2_DEFAULT),
            eps=cfg.get("eps", 1e-20),
        )
    else:
        raise ConfigError(f"unknown optimizer kind {kind}")
    return spec, optimizers.implied_norm(spec, layout)


def _wants_matrix_output(opt_cfg):
    if opt_cfg["kind"] in ("sd", "msd"):
        return opt_cfg["norm"]["kind"] == "spectral_per_matrix"
    return False


def build_dataset(cfg, seed):
    if cfg["kind"] == "synth_separable":
        return data.synth_separable(cfg["m"], cfg["d"], cfg["margin_floor"], seed)
    cache_dir = cfg.get("cache_dir")
    if cache_dir:
        cached = data.load_cached_subset(cache_dir, cfg["m"], seed)
        if cached is not None:
            return cached
    raw = data.parse_idx(cfg["images"], cfg["labels"])
    ds = data.even_odd_subset(raw, cfg["m"], seed)
    if cache_dir:
        data.store_cached_subset(cache_dir, ds, cfg["m"], seed)
    return ds


@dataclass
class RunResult:
    seed: int
    optimizer_name: str
    rows: list
    columns: list
    summary: dict
    csv_path: str = ""
    summary_path: str = ""


def _fmt(x):
    if x is None:
        return ""
    x = float(x)
    if np.isnan(x):
        return ""
    return repr(x)


def _tail(values, fraction):
    """Slice of the final ``fraction`` of entries (at least one when nonempty)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return arr
    start = min(arr.size - 1, int(np.ceil(arr.size * (1.0 - fraction))))
    return arr[start:]


def _nan_min(arr):
    arr = arr[~np.isnan(arr)]
    return float(arr.min()) if arr.size else np.nan


def _nan_mean(arr):
    arr = arr[~np.isnan(arr)]
    return float(arr.mean()) if arr.size else np.nan


def _nan_max(arr):
    arr = arr[~np.isnan(arr)]
    return float(arr.max()) if arr.size else np.nan


def run_single(config, opt_cfg, schedule_cfg, seed, optimizer_name="run"):
    """Train one seed; returns a RunResult (artifacts not yet written)."""
    model_spec = build_model(config["model"])
    loss_spec = build_loss(config["loss"])
    dataset = build_dataset(config["dataset"], seed)
    as_matrix = config["model"].get("output_as_matrix", _wants_matrix_output(opt_cfg))
    init_seed = seed + 1000003  # decorrelate init from the dataset draw
    theta = models.init_params(
        model_spec, init_seed, scale=config.get("init_scale", 0.01), output_as_matrix=as_matrix
    )
    opt_spec, own_norm = build_optimizer(opt_cfg, theta.layout)
    schedule = build_schedule(schedule_cfg)
    dt = config.get("dt", 1.0)
    log_every = config["log_every"]
    loss_target = config["stop"]["loss_target"]
    max_steps = config["stop"]["max_steps"]
    margin_norm_specs = [(mn["name"], build_norm(mn)) for mn in config.get("margin_norms", [])]
    checkpoints = sorted(config.get("kkt_checkpoints", []), reverse=True)
    is_adam_like = isinstance(opt_spec, optimizers.Adam)
    degree = model_spec.homogeneity_degree
    ell0 = float(losses.ell(loss_spec, 0.0))

    state = optimizers.init_state(opt_spec, theta)
    g, z, loss_value = models.loss_gradient(model_spec, loss_spec, state.theta, dataset)

    columns = ["step", "t", "loss", "eta", "int_eta"]
    for name, _ in margin_norm_specs:
        columns += [f"norm_{name}", f"hard_margin_{name}", f"soft_margin_{name}"]
    columns += [
        "param_alignment",
        "align_r",
        "ratio_norm_over_int_eta",
        "kkt_epsilon",
        "kkt_delta",
        "kkt_surrogate",
        "adam_sign_stat",
        "relu_sign_flips",
    ]

    rows = []
    trace = {
        "loss": [],
        "soft_margin": [],
        "param_alignment": [],
        "align_r": [],
        "max_abs_theta": [],
        "int_eta": [],
        "adam_sign_stat": [],
    }
    checkpoint_hits = {}
    prev_signs = None
    last_r = np.nan
    aborted = False
    divergence = DivergenceMonitor(ell0, 10 * log_every)

    def snapshot_monitors():
        """Cheap per-step monitors at the current (theta, g, z, loss)."""
        ntheta = norms.norm(own_norm, state.theta)
        ndual = norms.dual_norm(own_norm, g)
        if ntheta > 0 and ndual > 0:
            par = float(state.theta.data @ (-g.data)) / (ntheta * ndual)
        else:
            par = np.nan
        log_inv = np.log(1.0 / loss_value) if loss_value > 0 else np.inf
        if ntheta > 0 and log_inv > float(losses.phi(loss_spec, 0.0)):
            soft = losses.phi_inv(loss_spec, min(log_inv, 1e300)) / ntheta**degree
        else:
            soft = np.nan
        stat = np.nan
        if is_adam_like and state.m is not None and state.m.elapsed > 0:
            m_hat = ema.bias_correct(state.m)
            v_hat = ema.bias_correct(state.v)
            mask = v_hat > 0
            if np.any(mask & (g.data != 0)):
                _, stat = metrics.adam_sign_agreement(
                    m_hat[mask], v_hat[mask], g.data[mask], ADAM_SIGN_THRESHOLD
                )
        trace["loss"].append(loss_value)
        trace["soft_margin"].append(soft)
        trace["param_alignment"].append(par)
        trace["align_r"].append(last_r)
        trace["max_abs_theta"].append(float(np.max(np.abs(state.theta.data))))
        trace["int_eta"].append(state.int_eta)
        trace["adam_sign_stat"].append(stat)
        return ntheta, ndual, par, soft, stat

    def full_row(ntheta, ndual, par, soft, stat):
        nonlocal prev_signs
        row = {
            "step": state.step_index,
            "t": state.t,
            "loss": loss_value,
            "eta": schedule.eta(state.t),
            "int_eta": state.int_eta,
        }
        for name, nspec in margin_norm_specs:
            rep = metrics.margins(model_spec, loss_spec, nspec, state.theta, dataset)
            row[f"norm_{name}"] = rep.norm_value
            row[f"hard_margin_{name}"] = rep.hard_margin
            row[f"soft_margin_{name}"] = rep.soft_margin
        row["param_alignment"] = par
        row["align_r"] = last_r
        row["ratio_norm_over_int_eta"] = ntheta / state.int_eta if state.int_eta > 0 else np.nan
        q_min = float(np.min(z))
        if q_min > 0 and ndual > 0:
            kkt = metrics.kkt_residuals(
                model_spec, loss_spec, own_norm, state.theta, dataset, g=g, z=z
            )
            row["kkt_epsilon"] = kkt.epsilon
            row["kkt_delta"] = kkt.delta
            row["kkt_surrogate"] = kkt.alignment_surrogate
        else:
            row["kkt_epsilon"] = np.nan
            row["kkt_delta"] = np.nan
            row["kkt_surrogate"] = np.nan
        row["adam_sign_stat"] = stat
        signs = models.preactivation_signs(model_spec, state.theta, dataset)
        if signs is None or prev_signs is None:
            row["relu_sign_flips"] = np.nan
        else:
            row["relu_sign_flips"] = float(np.sum(signs != prev_signs))
        prev_signs = signs
        rows.append(row)

    step_of_last_row = -1
    while True:
        monitors = snapshot_monitors()
        if state.step_index % log_every == 0:
            full_row(*monitors)
            step_of_last_row = state.step_index
        if loss_value <= loss_target or state.step_index >= max_steps:
            if step_of_last_row != state.step_index:
                full_row(*monitors)
            break

        prev_state = state
        prev_g = g
        prev_ndual = monitors[1]
        try:
            state, info = optimizers.step(opt_spec, state, g, schedule, dt)
        except optimizers.NonFiniteUpdateError:
            aborted = True
            if step_of_last_row != state.step_index:
                full_row(*monitors)
            break

        # realized-step alignment against the pre-step gradient,
        # with nu = the reference rate eta(t) of this step
        delta = state.theta.data - prev_state.theta.data
        if prev_ndual > 0 and info.eta > 0:
            last_r = float(delta @ (-prev_g.data)) / (dt * info.eta * prev_ndual)
        else:
            last_r = np.nan

        # overflow here is how divergence shows up; it is detected, not raised
        with np.errstate(over="ignore", invalid="ignore"):
            g_new, z_new, new_loss = models.loss_gradient(model_spec, loss_spec, state.theta, dataset)
        if not np.isfinite(new_loss):
            # abort with the last good state on record
            aborted = True
            state = prev_state
            if step_of_last_row != state.step_index:
                full_row(*monitors)
            break

        loss_value = new_loss
        g, z = g_new, z_new
        divergence.update(loss_value)
        for level in checkpoints:
            if level not in checkpoint_hits and loss_value <= level:
                q_min = float(np.min(z))
                if q_min > 0:
                    kkt = metrics.kkt_residuals(
                        model_spec, loss_spec, own_norm, state.theta, dataset, g=g, z=z
                    )
                    checkpoint_hits[level] = {
                        "step": state.step_index,
                        "loss": loss_value,
                        "epsilon": None if np.isnan(kkt.epsilon) else kkt.epsilon,
                        "delta": kkt.delta,
                        "surrogate": kkt.alignment_surrogate,
                    }

    summary = _summarize(
        config,
        optimizer_name,
        seed,
        dataset,
        state,
        loss_value,
        trace,
        checkpoint_hits,
        aborted,
        divergence.warned,
        rows,
        margin_norm_specs,
        ell0,
    )
    return RunResult(
        seed=seed,
        optimizer_name=optimizer_name,
        rows=rows,
        columns=columns,
        summary=summary,
    )


def _summarize(config, optimizer_name, seed, dataset, state, loss_value, trace,
               checkpoint_hits, aborted, divergence_warning, rows, margin_norm_specs, ell0):
    losses_arr = np.asarray(trace["loss"])
    soft = np.asarray(trace["soft_margin"])
    par = np.asarray(trace["param_alignment"])
    max_abs = np.asarray(trace["max_abs_theta"])
    int_eta = np.asarray(trace["int_eta"])
    stat = np.asarray(trace["adam_sign_stat"])

    # soft-margin monotonicity bookkeeping after the loss first drops below ell(0)
    violations = 0
    transitions = 0
    eligible = np.nonzero(losses_arr < ell0)[0]
    if eligible.size:
        start = int(eligible[0])
        for i in range(start, soft.size - 1):
            a, b = soft[i], soft[i + 1]
            if np.isnan(a) or np.isnan(b):
                continue
            transitions += 1
            if b < a - SOFT_MARGIN_TOL * (1.0 + abs(a)):
                violations += 1

    ratios, _ = metrics.adam_path_bound(max_abs, int_eta, burn_in=1)

    final_margins = {}
    if rows:
        last = rows[-1]
        for name, _ in margin_norm_specs:
            final_margins[name] = {
                "norm_value": last.get(f"norm_{name}"),
                "hard_margin": last.get(f"hard_margin_{name}"),
                "soft_margin": _none_if_nan(last.get(f"soft_margin_{name}")),
            }

    return {
        "csv_schema": CSV_SCHEMA_VERSION,
        "optimizer": optimizer_name,
        "seed": seed,
        "dataset": dataset.provenance,
        "steps": state.step_index,
        "final_t": state.t,
        "final_loss": loss_value,
        "final_int_eta": state.int_eta,
        "final_margins": final_margins,
        "param_alignment_tail_min_25": _none_if_nan(_nan_min(_tail(par, 0.25))),
        "align_r_tail_min_25": _none_if_nan(_nan_min(_tail(np.asarray(trace["align_r"]), 0.25))),
        "adam_sign_stat_tail_mean_10": _none_if_nan(_nan_mean(_tail(stat, 0.10))),
        "path_ratio_tail_max_50": _none_if_nan(_nan_max(_tail(ratios, 0.50))),
        "soft_margin_violations": violations,
        "soft_margin_transitions": transitions,
        "kkt_checkpoints": {repr(level): hit for level, hit in checkpoint_hits.items()},
        "aborted": aborted,
        "divergence_warning": divergence_warning,
    }


def _none_if_nan(x):
    if x is None:
        return None
    x = float(x)
    return None if np.isnan(x) else x


def write_csv(result, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# csv-schema: {CSV_SCHEMA_VERSION}", ",".join(result.columns)]
    for row in result.rows:
        lines.append(",".join(_fmt(row.get(col)) if col not in ("step",) else str(row[col]) for col in result.columns))
    path.write_text("\n".join(lines) + "\n")
    result.csv_path = str(path)
    return path


def write_summary(result, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(result.summary, indent=2, sort_keys=True) + "\n")
    result.summary_path = str(path)
    return path


def output_dir(config, override=None):
    out = override or os.environ.get("NORMDESCENT_OUT") or config.get("output_dir", "out")
    return Path(out)


def run(config, out_override=None):
    """Execute the configured run for every seed; write CSV + summary per seed."""
    if "optimizer" not in config:
        raise ConfigError("run needs an 'optimizer' block")
    out = output_dir(config, out_override)
    name = config.get("name", "run")
    results = []
    for seed in config["seeds"]:
        result = run_single(config, config["optimizer"], config["schedule"], seed, name)
        write_csv(result, out / name / f"seed{seed}.csv")
        write_summary(result, out / name / f"seed{seed}_summary.json")
        results.append(result)
    return results


def _sweep_job(args):
    config, entry, seed = args
    schedule_cfg = entry.get("schedule", config["schedule"])
    return run_single(config, entry["optimizer"], schedule_cfg, seed, entry["name"])


def sweep(config, out_override=None, workers=None):
    """Run every (optimizer, seed) pair and aggregate final margins."""
    if "optimizers" not in config:
        raise ConfigError("sweep needs an 'optimizers' list")
    out = output_dir(config, out_override)
    jobs = [(config, entry, seed) for entry in config["optimizers"] for seed in config["seeds"]]
    if workers is None:
        workers = min(len(jobs), os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_job, jobs))
    else:
        results = [_sweep_job(job) for job in jobs]
    for result in results:
        write_csv(result, out / result.optimizer_name / f"seed{result.seed}.csv")
        write_summary(result, out / result.optimizer_name / f"seed{result.seed}_summary.json")
    table = aggregate(config, results)
    agg_path = out / "aggregate.csv"
    agg_path.parent.mkdir(parents=True, exist_ok=True)
    header = "optimizer,norm,margin_kind,mean,ci95_lo,ci95_hi,n_seeds"
    lines = [header]
    for row in table:
        lines.append(
            f"{row['optimizer']},{row['norm']},{row['margin_kind']},"
            f"{_fmt(row['mean'])},{_fmt(row['ci95_lo'])},{_fmt(row['ci95_hi'])},{row['n_seeds']}"
        )
    agg_path.write_text("\n".join(lines) + "\n")
    return results, table, agg_path


def aggregate(config, results):
    """Per-(optimizer, norm) mean and normal-approximation 95% interval."""
    table = []
    norm_names = [mn["name"] for mn in config.get("margin_norms", [])]
    opt_names = sorted({r.optimizer_name for r in results})
    for opt_name in opt_names:
        group = [r for r in results if r.optimizer_name == opt_name]
        for norm_name in norm_names:
            for kind in ("hard_margin", "soft_margin"):
                vals = [
                    r.summary["final_margins"].get(norm_name, {}).get(kind) for r in group
                ]
                vals = np.asarray([v for v in vals if v is not None], dtype=np.float64)
                if vals.size == 0:
                    continue
                mean = float(vals.mean())
                sd = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
                half = 1.96 * sd / np.sqrt(vals.size)
                table.append(
                    {
                        "optimizer": opt_name,
                        "norm": norm_name,
                        "margin_kind": kind,
                        "mean": mean,
                        "ci95_lo": mean - half,
                        "ci95_hi": mean + half,
                        "n_seeds": int(vals.size),
                    }
                )
    return table

"""Named property suites behind the ``verify`` CLI command.

Each suite runs a list of checks and returns (name, passed, detail) triples;
the CLI prints them as JSON lines and exits nonzero if any check failed.
These are the same properties the pytest suite asserts, packaged for
standalone runs against an installed copy.
"""

import itertools

import numpy as np

from . import data, ema, losses, metrics, models, norms, runner
from .params import Layout, ParamVector


def _random_param(rng, layout):
    return ParamVector(rng.normal(size=layout.size), layout)


def _check(checks, name, passed, detail=""):
    checks.append({"check": name, "passed": bool(passed), "detail": str(detail)})


def _mixed_layout():
    return Layout([("A", "matrix", (4, 3)), ("B", "matrix", (2, 5)), ("u", "vector", (6,))])


def suite_norms(rng=None):
    rng = rng or np.random.default_rng(20240817)
    checks = []
    layout = _mixed_layout()
    flat = Layout([("x", "vector", (9,))])
    variants = {
        "l1": (norms.L1(), flat),
        "l2": (norms.L2(), flat),
        "linf": (norms.Linf(), flat),
        "spectral": (norms.SpectralPerMatrix(), layout),
        "max_of_groups": (
            norms.MaxOfGroups(
                (
                    norms.GroupPart(("A", "B"), 0.7, norms.SpectralPerMatrix()),
                    norms.GroupPart(("u",), 1.0, norms.Linf()),
                )
            ),
            layout,
        ),
    }
    for label, (spec, lay) in variants.items():
        worst = 0.0
        for _ in range(200):
            g = _random_param(rng, lay)
            u = norms.steepest_direction(spec, g)
            dual = norms.dual_norm(spec, g)
            ip = float(u.data @ g.data)
            worst = max(worst, abs(ip + dual) / dual, abs(norms.norm(spec, u) - 1.0))
        tol = 1e-6 if label in ("spectral", "max_of_groups") else 1e-9
        _check(checks, f"duality-{label}", worst <= tol, f"worst rel err {worst:.3e}")

    # brute-force vertex oracles at small dimension
    worst = 0.0
    for _ in range(50):
        g = rng.normal(size=10)
        vertices = np.array(list(itertools.product((-1.0, 1.0), repeat=10)))
        best = float(np.min(vertices @ g))
        pv = ParamVector(g, Layout([("x", "vector", (10,))]))
        attained = float(norms.steepest_direction(norms.Linf(), pv).data @ g)
        worst = max(worst, abs(best - attained))
    _check(checks, "linf-vertex-oracle", worst <= 1e-9, f"worst gap {worst:.3e}")

    worst = 0.0
    for _ in range(50):
        g = rng.normal(size=12)
        best = min(float(s * g[j]) for j in range(12) for s in (-1.0, 1.0))
        pv = ParamVector(g, Layout([("x", "vector", (12,))]))
        attained = float(norms.steepest_direction(norms.L1(), pv).data @ g)
        worst = max(worst, abs(best - attained))
    _check(checks, "l1-vertex-oracle", worst <= 1e-9, f"worst gap {worst:.3e}")

    # max-of-groups dual equals the sum of scaled duals attained per group
    spec, lay = variants["max_of_groups"]
    worst = 0.0
    for _ in range(100):
        g = _random_param(rng, lay)
        direct = norms.dual_norm(spec, g)
        per_group = 0.0
        for part in spec.parts:
            sub_names = part.groups
            sub_layout = Layout([(n, lay.group(n).kind, lay.group(n).shape) for n in sub_names])
            sub_data = np.concatenate([g.view(n).ravel() for n in sub_names])
            sub = ParamVector(sub_data, sub_layout)
            u = norms.steepest_direction(part.spec, sub)
            per_group += -float(u.data @ sub.data) / part.scale
        worst = max(worst, abs(direct - per_group) / direct)
    _check(checks, "max-of-groups-dual-sum", worst <= 1e-6, f"worst rel err {worst:.3e}")
    return checks


def suite_ema(rng=None):
    rng = rng or np.random.default_rng(7)
    checks = []
    for c, k, horizon, tol in [(1.0, 0.5, 50.0, 1e-3), (1.0, 0.9, 100.0, 1e-2), (2.0, 1.0, 50.0, 1e-3)]:
        probe = ema.ratio_probe(lambda t, k=k: np.exp(-k * t), c, k, horizon, 1e-3)
        _check(
            checks,
            f"ratio-c{c}-k{k}",
            abs(probe.deviation) <= tol,
            f"ratio {probe.ratio:.6f} target {probe.target:.6f}",
        )

    # uniform momentum ratio bound on random bounded signals
    c1, c2 = 0.3, 0.05
    bound = ema.adam_ratio_bound(c1, c2)
    worst = -np.inf
    for _ in range(20):
        samples = rng.uniform(-2.0, 2.0, size=400)
        m = ema.ema_series(np.abs(samples), c1, 0.05)
        v = ema.ema_series(samples**2, c2, 0.05)
        worst = max(worst, float(np.max(m - bound * np.sqrt(v))))
    _check(checks, "adam-ratio-bound", worst <= 1e-9, f"worst slack {worst:.3e}")

    # first-order convergence of the update toward the ODE
    errs = []
    for dt in (1e-2, 1e-3):
        state = ema.fresh(1.0)
        t, err = 0.0, 0.0
        for _ in range(int(1.0 / dt)):
            g = np.cos(t)
            new = ema.ema_update(state, g, dt)
            resid = (new.value - state.value) / dt - 1.0 * (g - state.value)
            err = max(err, abs(resid))
            state, t = new, t + dt
        errs.append(err)
    order = np.log(errs[0] / errs[1]) / np.log(10.0)
    _check(checks, "ode-residual-order", order >= 0.9, f"measured order {order:.2f}")

    # bounded input gives an eventually bounded EMA
    samples = np.concatenate([rng.uniform(-5, 5, 50), rng.uniform(-1, 1, 500)])
    m = ema.ema_series(samples, 0.5, 1.0)
    _check(checks, "bounded-input", np.max(np.abs(m[-50:])) <= 1.0 + 1e-6, f"tail max {np.max(np.abs(m[-50:])):.3f}")
    return checks


def suite_models(rng=None):
    rng = rng or np.random.default_rng(3)
    checks = []
    specs = [models.Linear(6), models.TwoLayer(5, 7, 2.0), models.TwoLayer(5, 7, 1.0)]
    for spec in specs:
        layout = models.layout_for(spec)
        L = spec.homogeneity_degree
        worst_h, worst_e = 0.0, 0.0
        for _ in range(100):
            theta = ParamVector(rng.normal(size=layout.size), layout)
            x = rng.normal(size=spec.dim)
            f = models.forward(spec, theta, x)
            for alpha in (0.5, 2.0, 3.0):
                scaled = models.forward(spec, ParamVector(alpha * theta.data, layout), x)
                worst_h = max(worst_h, abs(scaled - alpha**L * f) / (1.0 + abs(alpha**L * f)))
            gr = models.grad(spec, theta, x)
            worst_e = max(worst_e, abs(theta.data @ gr.data - L * f) / (1.0 + abs(L * f)))
        tag = type(spec).__name__.lower() + (f"-q{spec.activation_power:g}" if isinstance(spec, models.TwoLayer) else "")
        _check(checks, f"homogeneity-{tag}", worst_h <= 1e-10, f"worst {worst_h:.3e}")
        _check(checks, f"euler-{tag}", worst_e <= 1e-8, f"worst {worst_e:.3e}")

    # central finite differences for the smooth activation
    spec = models.TwoLayer(4, 5, 2.0)
    layout = models.layout_for(spec)
    worst = 0.0
    h = 1e-5
    for _ in range(100):
        theta = ParamVector(rng.normal(size=layout.size), layout)
        x = rng.normal(size=spec.dim)
        gr = models.grad(spec, theta, x).data
        fd = np.zeros_like(gr)
        for j in range(layout.size):
            up = theta.data.copy()
            dn = theta.data.copy()
            up[j] += h
            dn[j] -= h
            fd[j] = (
                models.forward(spec, ParamVector(up, layout), x)
                - models.forward(spec, ParamVector(dn, layout), x)
            ) / (2 * h)
        scale = max(1.0, float(np.max(np.abs(gr))))
        worst = max(worst, float(np.max(np.abs(fd - gr))) / scale)
    _check(checks, "grad-finite-diff-q2", worst <= 1e-5, f"worst rel err {worst:.3e}")
    return checks


def suite_metrics(rng=None):
    rng = rng or np.random.default_rng(11)
    checks = []
    spec = models.TwoLayer(4, 6, 2.0)
    layout = models.layout_for(spec)
    loss_spec = losses.Exponential()
    ds = data.synth_separable(12, 4, 0.4, seed=5)

    worst_gap, worst_delta = 0.0, 0.0
    tried = 0
    while tried < 50:
        theta = ParamVector(rng.normal(size=layout.size) * 2.0, layout)
        z = models.margins(spec, theta, ds)
        if np.min(z) <= 0:
            continue
        tried += 1
        rep = metrics.margins(spec, loss_spec, norms.L2(), theta, ds)
        if not np.isnan(rep.soft_margin):
            worst_gap = max(worst_gap, rep.soft_margin - rep.hard_margin)
        kkt = metrics.kkt_residuals(spec, loss_spec, norms.L2(), theta, ds)
        q_min = float(np.min(z))
        direct = float(np.sum(kkt.lambdas * (z / q_min - 1.0)))
        worst_delta = max(worst_delta, abs(direct - kkt.delta) / (1.0 + abs(direct)))
    _check(checks, "soft-le-hard", worst_gap <= 1e-9, f"worst excess {worst_gap:.3e}")
    _check(checks, "delta-two-routes", worst_delta <= 1e-10, f"worst rel err {worst_delta:.3e}")

    # epsilon vanishes on a perfectly aligned linear snapshot
    lin = models.Linear(3)
    llay = models.layout_for(lin)
    ds1 = data.Dataset(features=np.array([[1.0, 0.0, 0.0]]), labels=np.array([1.0]), provenance="v", seed=0)
    theta = ParamVector(np.array([4.0, 0.0, 0.0]), llay)
    eps_l2 = metrics.kkt_residuals(lin, loss_spec, norms.L2(), theta, ds1).epsilon
    _check(checks, "eps-zero-aligned-l2", eps_l2 <= 1e-12, f"eps {eps_l2:.3e}")
    ds2 = data.Dataset(features=np.array([[1.0, 1.0, 1.0]]), labels=np.array([1.0]), provenance="v", seed=0)
    theta = ParamVector(np.array([2.0, 2.0, 2.0]), llay)
    eps_linf = metrics.kkt_residuals(lin, loss_spec, norms.Linf(), theta, ds2).epsilon
    _check(checks, "eps-zero-aligned-linf", eps_linf <= 1e-12, f"eps {eps_linf:.3e}")

    # simplex projection against brute-force support enumeration
    worst = 0.0
    for _ in range(100):
        w = rng.normal(size=6) * 2.0
        proj = metrics.project_simplex(w)
        best = np.inf
        n = w.size
        for mask in range(1, 2**n):
            sel = [(mask >> i) & 1 for i in range(n)]
            idx = [i for i, s in enumerate(sel) if s]
            cand = np.zeros(n)
            shift = (1.0 - w[idx].sum()) / len(idx)
            vals = w[idx] + shift
            if np.any(vals < -1e-12):
                continue
            cand[idx] = np.maximum(vals, 0.0)
            best = min(best, float(np.sum((cand - w) ** 2)))
        worst = max(worst, abs(float(np.sum((proj - w) ** 2)) - best))
    _check(checks, "simplex-projection-oracle", worst <= 1e-10, f"worst gap {worst:.3e}")
    return checks


def _criterion5_config(opt_norm, eta0):
    return {
        "name": f"nsd-{opt_norm}",
        "model": {"kind": "linear", "dim": 10},
        "loss": {"kind": "exponential"},
        "dataset": {"kind": "synth_separable", "m": 32, "d": 10, "margin_floor": 0.3},
        "optimizer": {"kind": "sd", "norm": {"kind": opt_norm}, "normalized": True},
        "margin_norms": [{"name": opt_norm, "kind": opt_norm}],
        "schedule": {"kind": "power_decay", "eta0": eta0, "exponent": 0.8, "t_init": 1.0},
        "dt": 1.0,
        "stop": {"loss_target": 1e-8, "max_steps": 4000},
        "log_every": 200,
        "seeds": [0],
    }


def suite_nsd_monotonicity():
    checks = []
    for opt_norm, eta0 in [("l2", 0.4), ("linf", 0.3)]:
        config = _criterion5_config(opt_norm, eta0)
        result = runner.run_single(config, config["optimizer"], config["schedule"], 0, config["name"])
        s = result.summary
        frac = s["soft_margin_violations"] / max(1, s["soft_margin_transitions"])
        _check(
            checks,
            f"soft-margin-monotone-{opt_norm}",
            frac <= 0.01 and s["soft_margin_transitions"] >= 1000 and not s["aborted"],
            f"violations {s['soft_margin_violations']}/{s['soft_margin_transitions']}",
        )
    return checks


def suite_adam_bounds():
    checks = []
    config = {
        "name": "adam-probe",
        "model": {"kind": "linear", "dim": 8},
        "loss": {"kind": "exponential"},
        "dataset": {"kind": "synth_separable", "m": 16, "d": 8, "margin_floor": 0.3},
        "optimizer": {"kind": "adam"},
        "margin_norms": [{"name": "linf", "kind": "linf"}],
        "schedule": {"kind": "power_decay", "eta0": 0.05, "exponent": 0.8, "t_init": 1.0},
        "dt": 1.0,
        "stop": {"loss_target": 1e-8, "max_steps": 10000},
        "log_every": 500,
        "seeds": [0],
    }
    result = runner.run_single(config, config["optimizer"], config["schedule"], 0, "adam-probe")
    s = result.summary
    stat = s["adam_sign_stat_tail_mean_10"]
    _check(checks, "adam-sign-agreement", stat is not None and stat <= 0.1, f"tail stat {stat}")
    ratio = s["path_ratio_tail_max_50"]
    _check(checks, "adam-path-bound", ratio is not None and ratio <= 1.05, f"tail ratio {ratio}")
    return checks


SUITES = {
    "norms": suite_norms,
    "ema": suite_ema,
    "models": suite_models,
    "metrics": suite_metrics,
    "nsd-monotonicity": suite_nsd_monotonicity,
    "adam-bounds": suite_adam_bounds,
}


def run_suite(name):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name]()

"""Experiment runner: reproduce the regression/classification studies from
JSON configs with seeded determinism and machine-readable outputs.

Verbs:
    run              execute one experiment end to end
    sweep            repeat an experiment over a list of parameter values
    validate-config  parse and check a config file
    oracle-check     circuit-vs-analytical equivalence suite

Reports are JSON (full config echo plus metrics); figure-style data (traces,
correlation pairs, weight scatter, spectra) lands next to the report as CSV.
The default output directory comes from $XPINV_OUT_DIR, falling back to
./xpinv_out.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import circuit as circuit_mod
from . import datasets, learn, mapping, numerics
from .circuit import AmplifierModel
from .device import SIGMA_MODES, ConductanceLevelSet
from .errors import ConfigInvalidError, UnknownParameterError, XpinvError

EXPERIMENTS = ("fit-linear", "fit-logistic", "predict", "boston", "mnist-train",
               "noise-sweep", "wire-sweep", "transient", "stability")

SWEEPABLE = {
    "train_size": ("train_size",),
    "r_segment": ("circuit", "wire_r_per_segment"),
    "sigma_mode": ("device", "sigma_mode"),
    "g_unit": ("scaling", "g_unit"),
    "noise_sd": ("noise_sd",),
    "seed": ("seed",),
}


@dataclass
class DeviceConfig:
    g_max: float = 1e-3
    num_uniform_levels: int = 31
    ratio: float = 1e3
    sigma_mode: str = "none"
    pv_tolerance: float = 0.05
    quantize: bool = True      # False: ideal analog mapping (no level set)

    def level_set(self):
        if not self.quantize:
            return None
        return ConductanceLevelSet(g_max=self.g_max,
                                   num_uniform_levels=self.num_uniform_levels,
                                   ratio=self.ratio)


@dataclass
class AmplifierConfig:
    dc_gain: float = 1e5
    gbw: float = 10e6
    clamp: float = 0.7

    def build(self):
        return AmplifierModel(dc_gain=self.dc_gain, gbw=self.gbw, clamp=self.clamp)


@dataclass
class CircuitConfig:
    nfa: AmplifierConfig = field(default_factory=AmplifierConfig)
    pfa: AmplifierConfig = field(default_factory=AmplifierConfig)
    g_ti: float | None = None
    wire_r_per_segment: float = 0.0


@dataclass
class ScalingConfig:
    g_unit: float = 100e-6
    i_unit: float = 100e-6
    headroom: float = 0.8
    v_limit: float = 0.5
    y_scale: float | None = None   # None: choose automatically


@dataclass
class ExperimentConfig:
    experiment: str = "fit-linear"
    backend: str = "oracle"           # "oracle" | "circuit"
    seed: int = 0
    repeats: int = 1
    output_dir: str | None = None
    device: DeviceConfig = field(default_factory=DeviceConfig)
    circuit: CircuitConfig = field(default_factory=CircuitConfig)
    scaling: ScalingConfig = field(default_factory=ScalingConfig)
    # dataset paths (bundled defaults when None)
    boston_csv: str | None = None
    mnist_train_images: str | None = None
    mnist_train_labels: str | None = None
    mnist_test_images: str | None = None
    mnist_test_labels: str | None = None
    # synthetic-problem knobs (fit-linear, predict, transient, stability)
    n_samples: int = 6
    w_true: list = field(default_factory=lambda: [0.2, 0.1])
    noise_sd: float = 0.0
    x_star: list = field(default_factory=list)
    # logistic knobs
    amplitude: float = 0.2
    n_per_class: int = 10
    # boston / transient knobs
    train_size: int | None = None
    t_end: float | None = None
    dt: float | None = None
    # mnist knobs
    fan_out: int = 4
    mnist_amplitude: float = 0.05
    train_digits: int = 3000
    eval_digits: int | None = None
    # sweeps
    sigma_modes: list = field(default_factory=lambda: ["none", "dG/6", "dG/4", "dG/2"])
    r_segments: list = field(default_factory=lambda: [0.0, 0.1, 0.3, 1.0])


def _from_dict(cls, data, path=""):
    """Build a (possibly nested) config dataclass, reporting bad fields by
    their dotted path."""
    if not isinstance(data, dict):
        raise ConfigInvalidError(f"expected an object, got {type(data).__name__}",
                                 field=path or "<root>")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        where = f"{path}.{key}" if path else key
        if key not in fields:
            raise ConfigInvalidError("unknown field", field=where)
        ftype = fields[key].type
        if isinstance(value, dict) and ftype in ("DeviceConfig", "CircuitConfig",
                                                 "ScalingConfig", "AmplifierConfig"):
            value = _from_dict(globals()[ftype], value, where)
        kwargs[key] = value
    try:
        cfg = cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalidError(str(exc), field=path or "<root>") from exc
    return cfg


def load_config(path, overrides=()):
    """Read a JSON config, apply key=value overrides, validate."""
    with open(path) as f:
        data = json.load(f)
    for ov in overrides:
        if "=" not in ov:
            raise ConfigInvalidError("override must look like key.path=value",
                                     field=ov)
        key, _, raw = ov.partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = data
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value
    return validate_config(data)


def validate_config(data):
    cfg = _from_dict(ExperimentConfig, data)
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigInvalidError(f"must be one of {EXPERIMENTS}", field="experiment")
    if cfg.backend not in ("oracle", "circuit"):
        raise ConfigInvalidError("must be 'oracle' or 'circuit'", field="backend")
    if cfg.device.sigma_mode not in SIGMA_MODES:
        raise ConfigInvalidError(f"must be one of {sorted(SIGMA_MODES)}",
                                 field="device.sigma_mode")
    if cfg.repeats < 1:
        raise ConfigInvalidError("must be >= 1", field="repeats")
    return cfg


def config_to_dict(cfg):
    return dataclasses.asdict(cfg)


def _backend_obj(cfg: ExperimentConfig, seed):
    if cfg.backend == "oracle":
        return "oracle"
    return learn.CircuitBackend(
        levels=cfg.device.level_set(),
        sigma_mode=cfg.device.sigma_mode,
        pv_tolerance=cfg.device.pv_tolerance,
        seed=seed,
        g_unit=cfg.scaling.g_unit,
        i_unit=cfg.scaling.i_unit,
        g_ti=cfg.circuit.g_ti,
        headroom=cfg.scaling.headroom,
        v_limit=cfg.scaling.v_limit,
        y_scale=cfg.scaling.y_scale,
        wire_r_per_segment=cfg.circuit.wire_r_per_segment,
        nfa=cfg.circuit.nfa.build(),
        pfa=cfg.circuit.pfa.build(),
    )


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(header)
        wr.writerows(rows)
    return str(path)


def _boston(cfg):
    path = cfg.boston_csv or datasets.default_data_dir() / "boston_housing.csv"
    n_train = cfg.train_size or datasets.BOSTON_TRAIN
    return datasets.load_boston(path, n_train=n_train)


def _spawn_seeds(master, n):
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(master).spawn(n)]


# ---------------------------------------------------------------------------
# experiment pipelines; each returns (metrics, repeat_records, artifacts)

def _exp_fit_linear(cfg, outdir):
    problem = datasets.synth_linear(cfg.n_samples, cfg.w_true,
                                    noise_sd=cfg.noise_sd, seed=cfg.seed)
    fit = learn.fit_linear(problem, backend=_backend_obj(cfg, cfg.seed))
    oracle = learn.fit_linear(problem, backend="oracle")
    denom = np.max(np.abs(oracle.w))
    art = [_write_csv(outdir / "weights.csv", ["index", "w", "w_oracle"],
                      list(zip(range(len(fit.w)), fit.w, oracle.w)))]
    return ({"w": [float(v) for v in fit.w], "sigma_p": fit.sigma_p, "lse": fit.lse,
             "max_rel_error_vs_oracle": float(np.max(np.abs(fit.w - oracle.w)) / denom)},
            [], art)


def _exp_fit_logistic(cfg, outdir):
    pts, labels = datasets.synth_blobs(n_per_class=cfg.n_per_class, seed=cfg.seed)
    X = mapping.build_design_matrix(list(pts), degree=1, include_bias=True)
    cl = learn.ClassLabels(labels=labels, a=cfg.amplitude)
    fit = learn.fit_logistic(X, cl, backend=_backend_obj(cfg, cfg.seed))
    train_pred = fit.boundary.classify(pts)
    acc = float(np.mean(train_pred == labels))
    art = [_write_csv(outdir / "points.csv", ["x1", "x2", "label", "predicted"],
                      [(p[0], p[1], int(l), int(q)) for p, l, q in
                       zip(pts, labels, train_pred)])]
    return ({"w": [float(v) for v in fit.w], "train_accuracy": acc}, [], art)


def _exp_predict(cfg, outdir):
    problem = datasets.synth_linear(cfg.n_samples, cfg.w_true,
                                    noise_sd=cfg.noise_sd, seed=cfg.seed)
    backend = _backend_obj(cfg, cfg.seed)
    fit = learn.fit_linear(problem, backend=backend)
    w_or = learn.fit_linear(problem, backend="oracle").w
    rows = []
    for xs in cfg.x_star:
        x_row = np.concatenate([[1.0], np.atleast_1d(np.asarray(xs, float))])
        if len(x_row) < problem.X.shape[1]:   # polynomial features
            x_row = np.array([x_row[1] ** k for k in range(problem.X.shape[1])])
            x_row[0] = 1.0
        analytical = float(x_row @ w_or)
        if fit.circuit is not None:
            y_star = circuit_mod.predict(fit.circuit, x_row)
        else:
            y_star = float(x_row @ fit.w)
        rows.append((xs, y_star, analytical))
    art = [_write_csv(outdir / "predictions.csv",
                      ["x_star", "y_star", "y_analytical"], rows)]
    return ({"predictions": [{"x_star": r[0], "y_star": r[1], "y_analytical": r[2]}
                             for r in rows]}, [], art)


def _boston_metrics(ds, backend):
    X_tr, y_tr, X_te, y_te = ds.split()
    problem = learn.RegressionProblem(X=X_tr, y=y_tr)
    fit = learn.fit_linear(problem, backend=backend)
    return fit, {
        "sigma_p_train": fit.sigma_p,
        "sigma_p_test": learn.evaluate_prediction(fit.w, X_te, y_te),
        "lse_train": fit.lse,
    }


def _exp_boston(cfg, outdir):
    ds = _boston(cfg)
    X_tr, y_tr, X_te, y_te = ds.split()
    oracle_fit, oracle_m = _boston_metrics(ds, "oracle")
    metrics = {"oracle": oracle_m}
    repeats = []
    arts = []
    fit = oracle_fit
    if cfg.backend == "circuit":
        for rep, seed in enumerate(_spawn_seeds(cfg.seed, cfg.repeats)):
            fit, m = _boston_metrics(ds, _backend_obj(cfg, seed))
            scale = np.max(np.abs(oracle_fit.w))
            m["weight_error_vs_scale"] = float(np.max(np.abs(fit.w - oracle_fit.w)) / scale)
            repeats.append({"repeat": rep, "seed": seed, **m})
        metrics["circuit"] = {
            k: float(np.mean([r[k] for r in repeats]))
            for k in ("sigma_p_train", "sigma_p_test", "weight_error_vs_scale")
        }
    arts.append(_write_csv(outdir / "weights.csv",
                           ["index", "w", "w_oracle"],
                           list(zip(range(len(fit.w)), fit.w, oracle_fit.w))))
    arts.append(_write_csv(outdir / "train_correlation.csv",
                           ["price_real", "price_fitted"],
                           list(zip(y_tr, X_tr @ fit.w))))
    arts.append(_write_csv(outdir / "test_correlation.csv",
                           ["price_real", "price_predicted"],
                           list(zip(y_te, X_te @ fit.w))))
    return metrics, repeats, arts


def _exp_mnist(cfg, outdir):
    data_dir = datasets.default_data_dir() / "mnist"
    train = datasets.load_mnist(
        cfg.mnist_train_images or data_dir / "train3000-images.idx3-ubyte.gz",
        cfg.mnist_train_labels or data_dir / "train3000-labels.idx1-ubyte.gz",
        limit=cfg.train_digits,
    )
    test = datasets.load_mnist(
        cfg.mnist_test_images or data_dir / "t10k-images.idx3-ubyte.gz",
        cfg.mnist_test_labels or data_dir / "t10k-labels.idx1-ubyte.gz",
        limit=cfg.eval_digits,
    )
    tlc = learn.TwoLayerConfig(fan_out=cfg.fan_out, a=cfg.mnist_amplitude,
                               seed=cfg.seed)
    backend = _backend_obj(cfg, cfg.seed)
    model = learn.train_two_layer(train.images, train.labels, config=tlc,
                                  backend=backend)
    oracle = learn.train_two_layer(train.images, train.labels, config=tlc,
                                   backend="oracle")
    pred = learn.infer_two_layer(model, test.images)
    acc = float(np.mean(pred == test.labels))
    acc500 = float(np.mean(pred[:500] == test.labels[:500]))
    Xb = model.hidden_features(train.images)
    S = np.where(learn._one_hot(train.labels) == 1.0, tlc.a, -tlc.a)
    lse = [float(np.sum((Xb @ model.w2[:, k] - S[:, k]) ** 2)) for k in range(10)]
    lse_or = [float(np.sum((Xb @ oracle.w2[:, k] - S[:, k]) ** 2)) for k in range(10)]
    model_path = outdir / "model.npz"
    model.save(model_path)
    arts = [str(model_path),
            _write_csv(outdir / "lse_per_output.csv",
                       ["digit", "lse", "lse_oracle"],
                       [(k, lse[k], lse_or[k]) for k in range(10)]),
            _write_csv(outdir / "weight_scatter.csv",
                       ["digit", "w_oracle", "w"],
                       [(k, oracle.w2[j, k], model.w2[j, k])
                        for k in range(10) for j in range(model.w2.shape[0])])]
    return ({"accuracy": acc, "accuracy_first_500": acc500,
             "lse_per_output": lse, "lse_per_output_oracle": lse_or,
             "n_second_layer_solves": 10}, [], arts)


def _exp_noise_sweep(cfg, outdir):
    ds = _boston(cfg)
    rows = []
    repeats = []
    for mode in cfg.sigma_modes:
        cfg_m = dataclasses.replace(cfg, device=dataclasses.replace(
            cfg.device, sigma_mode=mode), backend="circuit")
        vals_tr, vals_te = [], []
        for rep, seed in enumerate(_spawn_seeds(cfg.seed, cfg.repeats)):
            _, m = _boston_metrics(ds, _backend_obj(cfg_m, seed))
            vals_tr.append(m["sigma_p_train"])
            vals_te.append(m["sigma_p_test"])
            repeats.append({"sigma_mode": mode, "repeat": rep, "seed": seed, **m})
        rows.append((mode, float(np.mean(vals_tr)), float(np.std(vals_tr)),
                     float(np.mean(vals_te)), float(np.std(vals_te))))
    art = [_write_csv(outdir / "noise_sweep.csv",
                      ["sigma_mode", "sigma_p_train_mean", "sigma_p_train_std",
                       "sigma_p_test_mean", "sigma_p_test_std"], rows)]
    return ({"summary": [{"sigma_mode": r[0], "sigma_p_train_mean": r[1],
                          "sigma_p_test_mean": r[3]} for r in rows]},
            repeats, art)


def _exp_wire_sweep(cfg, outdir):
    ds = _boston(cfg)
    rows = []
    for r_seg in cfg.r_segments:
        cfg_r = dataclasses.replace(cfg, circuit=dataclasses.replace(
            cfg.circuit, wire_r_per_segment=float(r_seg)), backend="circuit")
        _, m = _boston_metrics(ds, _backend_obj(cfg_r, cfg.seed))
        rows.append((float(r_seg), m["sigma_p_train"], m["sigma_p_test"]))
    art = [_write_csv(outdir / "wire_sweep.csv",
                      ["r_segment_ohm", "sigma_p_train", "sigma_p_test"], rows)]
    return ({"summary": [{"r_segment": r[0], "sigma_p_train": r[1],
                          "sigma_p_test": r[2]} for r in rows]}, [], art)


def _build_circuit_for(cfg):
    """Circuit for transient/stability runs: Boston subset or synthetic.

    Subsets sample the training rows evenly rather than taking the first
    ``train_size`` (a leading block can miss every CHAS=1 house, leaving a
    zero column and a rank-deficient array)."""
    if cfg.train_size is not None:
        ds = datasets.load_boston(
            cfg.boston_csv or datasets.default_data_dir() / "boston_housing.csv")
        n = min(cfg.train_size, len(ds.train_indices))
        idx = ds.train_indices[
            np.floor(np.arange(n) * len(ds.train_indices) / n).astype(int)]
        X = ds.design_matrix(idx)
        y = ds.prices[idx]
    else:
        problem = datasets.synth_linear(cfg.n_samples, cfg.w_true,
                                        noise_sd=cfg.noise_sd, seed=cfg.seed)
        X, y = problem.X, problem.y
    backend = _backend_obj(dataclasses.replace(cfg, backend="circuit"), cfg.seed)
    return learn.build_circuit(X, y, backend)


def _exp_transient(cfg, outdir):
    c = _build_circuit_for(cfg)
    spec = circuit_mod.stability_spectrum(c)
    res = circuit_mod.transient(c, t_end=cfg.t_end, dt=cfg.dt)
    v_ss = circuit_mod.steady_state(c)
    denom = max(np.max(np.abs(v_ss)), 1e-30)
    art = [_write_csv(outdir / "trace.csv",
                      ["time_s"] + [f"v_{j}" for j in range(1, res.trace.shape[1] + 1)]
                      + ["clamped_any"],
                      [(t, *row, int(res.clamped.any()))
                       for t, row in zip(res.times, res.trace)])]
    return ({"settle_time_s": res.settle_time, "settled": res.settled,
             "lambda_min": spec.min_real_magnitude, "stable": spec.stable,
             "clamped_amplifiers": int(res.clamped.sum()),
             "final_vs_steady_rel": float(np.max(np.abs(res.final_v - v_ss)) / denom)},
            [], art)


def _exp_stability(cfg, outdir):
    c = _build_circuit_for(cfg)
    spec = circuit_mod.stability_spectrum(c)
    lam = spec.eigenvalues
    art = [_write_csv(outdir / "spectrum.csv", ["re", "im"],
                      [(z.real, z.imag) for z in lam])]
    return ({"stable": spec.stable, "lambda_min": spec.min_real_magnitude,
             "n_states": len(lam)}, [], art)


_PIPELINES = {
    "fit-linear": _exp_fit_linear,
    "fit-logistic": _exp_fit_logistic,
    "predict": _exp_predict,
    "boston": _exp_boston,
    "mnist-train": _exp_mnist,
    "noise-sweep": _exp_noise_sweep,
    "wire-sweep": _exp_wire_sweep,
    "transient": _exp_transient,
    "stability": _exp_stability,
}


def _outdir(cfg, tag=None):
    base = cfg.output_dir or os.environ.get("XPINV_OUT_DIR", "xpinv_out")
    name = cfg.experiment if tag is None else f"{cfg.experiment}_{tag}"
    out = Path(base) / name
    out.mkdir(parents=True, exist_ok=True)
    return out


def run(cfg: ExperimentConfig, tag=None):
    """Execute one experiment; write report.json and CSV artifacts."""
    outdir = _outdir(cfg, tag)
    t0 = time.perf_counter()
    metrics, repeats, artifacts = _PIPELINES[cfg.experiment](cfg, outdir)
    report = {
        "config": config_to_dict(cfg),
        "backend": cfg.backend,
        "seed": cfg.seed,
        "metrics": metrics,
        "repeats": repeats,
        "artifacts": [str(a) for a in artifacts],
        "wall_clock_s": time.perf_counter() - t0,
        "report_version": 1,
    }
    with open(outdir / "report.json", "w") as f:
        json.dump(report, f, indent=2, sort_keys=True, default=float)
    return report


def sweep(cfg: ExperimentConfig, parameter, values):
    """One run per value of a recognized config parameter plus a summary CSV.

    The summary correlates settle time against the slowest pole when both are
    reported, echoing how computing time follows the spectrum rather than the
    problem size.
    """
    if parameter not in SWEEPABLE:
        raise UnknownParameterError(
            f"unknown sweep parameter {parameter!r}; known: {sorted(SWEEPABLE)}"
        )
    path = SWEEPABLE[parameter]
    reports = []
    rows = []
    for val in values:
        cfg_v = cfg
        if len(path) == 1:
            cfg_v = dataclasses.replace(cfg, **{path[0]: val})
        else:
            sub = dataclasses.replace(getattr(cfg, path[0]), **{path[1]: val})
            cfg_v = dataclasses.replace(cfg, **{path[0]: sub})
        rep = run(cfg_v, tag=f"{parameter}={val}")
        reports.append(rep)
        m = rep["metrics"]
        rows.append((val,
                     m.get("lambda_min", ""),
                     m.get("settle_time_s", ""),
                     m.get("sigma_p_train", m.get("oracle", {}).get("sigma_p_train", "")),
                     m.get("accuracy", "")))
    outdir = _outdir(cfg, tag=f"sweep_{parameter}")
    summary_csv = _write_csv(outdir / "sweep_summary.csv",
                             [parameter, "lambda_min", "settle_time_s",
                              "sigma_p_train", "accuracy"], rows)
    summary = {"parameter": parameter, "values": list(values),
               "summary_csv": summary_csv}
    lam = [r[1] for r in rows if r[1] != ""]
    st = [r[2] for r in rows if r[2] != ""]
    if len(lam) == len(st) and len(lam) >= 3:
        from scipy.stats import spearmanr

        rho = float(spearmanr(lam, st).statistic)
        summary["spearman_settle_vs_lambda_min"] = rho
        summary["settle_tracks_inverse_lambda_min"] = rho < 0.0
    with open(outdir / "sweep_summary.json", "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True, default=float)
    return reports, summary


def oracle_check(n_instances=500, seed=0, n_max=30, m_max=8, tol=1e-6):
    """Noiseless steady-state weights vs the analytical solver on random
    well-conditioned problems. Returns (n_failures, worst relative error)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    failures = 0
    for _ in range(n_instances):
        m = int(rng.integers(1, m_max + 1))
        n = int(rng.integers(m + 1, n_max + 1))
        X = rng.uniform(0.0, 5.0, (n, m))
        y = rng.uniform(-2.0, 2.0, n)
        w_ref = numerics.pseudoinverse_solve(X, y)
        pol = mapping.make_policy(X, y, oracle_w=w_ref)
        mp = mapping.map_to_conductance(X, y, pol)
        v = circuit_mod.steady_state(circuit_mod.CrosspointCircuit(mapped=mp))
        w = mapping.unscale_weights(v, pol)
        rel = float(np.max(np.abs(w - w_ref)) / max(np.max(np.abs(w_ref)), 1e-30))
        worst = max(worst, rel)
        if rel > tol:
            failures += 1
    return failures, worst


def main(argv=None):
    parser = argparse.ArgumentParser(prog="xpinv",
                                     description="crosspoint one-step learning simulator")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a config file")
    p_run.add_argument("-c", "--config", required=True)
    p_run.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config field")

    p_sweep = sub.add_parser("sweep", help="run an experiment over parameter values")
    p_sweep.add_argument("-c", "--config", required=True)
    p_sweep.add_argument("--parameter", required=True)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated list, JSON-parsed per item")
    p_sweep.add_argument("--set", dest="overrides", action="append", default=[])

    p_val = sub.add_parser("validate-config", help="check a config file")
    p_val.add_argument("-c", "--config", required=True)

    p_oc = sub.add_parser("oracle-check",
                          help="circuit vs analytical equivalence suite")
    p_oc.add_argument("--instances", type=int, default=500)
    p_oc.add_argument("--seed", type=int, default=0)
    p_oc.add_argument("--tolerance", type=float, default=1e-6)

    args = parser.parse_args(argv)
    try:
        if args.verb == "validate-config":
            load_config(args.config)
            print("config ok")
            return 0
        if args.verb == "oracle-check":
            failures, worst = oracle_check(n_instances=args.instances,
                                           seed=args.seed, tol=args.tolerance)
            print(f"oracle-check: {args.instances} instances, "
                  f"worst relative error {worst:.3e}, failures {failures}")
            return 0 if failures == 0 else 1
        cfg = load_config(args.config, overrides=args.overrides)
        if args.verb == "run":
            report = run(cfg)
            print(json.dumps(report["metrics"], indent=2, sort_keys=True, default=float))
            return 0
        if args.verb == "sweep":
            values = [json.loads(v) if _is_json(v) else v
                      for v in args.values.split(",")]
            _, summary = sweep(cfg, args.parameter, values)
            print(json.dumps(summary, indent=2, sort_keys=True, default=float))
            return 0
    except XpinvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def _is_json(s):
    try:
        json.loads(s)
        return True
    except json.JSONDecodeError:
        return False


if __name__ == "__main__":
    sys.exit(main())

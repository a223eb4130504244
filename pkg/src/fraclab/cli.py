"""Command-line front end: one JSON config in, one artifact directory out.

Every command reads a fully validated config, runs the matching study, and
writes under the output directory: report.json with the verdicts, one CSV and
one gnuplot .dat per data series, and manifest.json with the config echo,
version, backend, seed, worker count, and wall-clock per stage. The exit code
is the verdict: 0 when every ledger in the report passed, 1 when any failed,
2 for a rejected config, 3 when a numerical stage gave up (the failure is
recorded in the manifest).

Determinism: for a fixed config, seed, and worker count the bytes of
report.json and of every CSV and .dat are identical across runs. Wall-clock
times live only in the manifest.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import COMMANDS, ExperimentConfig, load_config
from .cutoffs import capacity_sequence, cutoff_from_descriptor, manifold_cutoff, point_cutoff, tube_cutoff
from .errors import ConfigInvalid, FracLabError
from .fields import BallIndicator, ShiftedPower, field_from_descriptor
from .fraclap import frac_laplacian, frac_laplacian_radial, frac_order
from .oracle import fourier_oracle
from .reports import PlotSeries, RunManifest, emit_plot_data, report_payload, write_report
from .sets import CircleInR3, FinitePoints, ProductCantor, Segment, assouad_estimate, fit_lambda, set_from_descriptor
from .verify import (
    _finish,
    _sample,
    bootstrap_exponents,
    bubble_identity_ledger,
    capacity_decay,
    distance_function_ledger,
    distance_power,
    power_law_ledger,
    removability_ledger,
    superharmonic_check,
    verify_cutoff_bound,
    verify_phi0_decay,
    verify_truncation_convergence,
)


# ---------------------------------------------------------------------------
# Command runners. Each returns (report objects, plot series); the driver
# serializes the objects and derives the exit code from the ledger verdicts.
# ---------------------------------------------------------------------------


def _run_eval(cfg: ExperimentConfig):
    field = field_from_descriptor(cfg.field)
    sigma = float(cfg.problem["sigma"])
    order = frac_order(field.dim, sigma)
    spec = cfg.quadrature
    points, rows = [], []

    if "r" in cfg.problem or np.isscalar(cfg.problem.get("x")):
        raw = cfg.problem.get("r", cfg.problem.get("x"))
        for r in np.atleast_1d(np.asarray(raw, dtype=np.float64)):
            res = frac_laplacian_radial(field, order, float(r), spec)
            points.append(
                {"r": float(r), "value": res.value, "abs_error": res.abs_error, "method": res.method}
            )
            rows.append((float(r), res.value, res.abs_error))
    else:
        for x in np.atleast_2d(np.asarray(cfg.problem["x"], dtype=np.float64)):
            res = frac_laplacian(field, order, x, spec)
            points.append(
                {
                    "x": [float(c) for c in x],
                    "value": res.value,
                    "abs_error": res.abs_error,
                    "method": res.method,
                }
            )
            rows.append((float(np.linalg.norm(x)), res.value, res.abs_error))

    report = {"type": "eval", "sigma": sigma, "field": cfg.field, "points": points}
    series = [
        PlotSeries("eval", "(-Delta)^sigma f at the requested points", ("r", "value", "abs_error"), rows)
    ]
    return [report], series


def _run_oracle(cfg: ExperimentConfig):
    field = field_from_descriptor(cfg.field)
    sigma = float(cfg.problem["sigma"])
    order = frac_order(field.dim, sigma)
    spec = cfg.quadrature
    radii = [float(r) for r in cfg.sweeps.get("radii", [1.0])]
    tol = float(cfg.sweeps.get("tol", 1e-4))
    samples, rows = [], []
    for r in radii:
        quad = frac_laplacian_radial(field, order, r, spec)
        want = fourier_oracle(field, order, r)
        samples.append(
            _sample(
                {"kind": "route-agreement", "r": r, "quadrature": quad.value, "oracle": want},
                abs(quad.value - want),
                tol,
            )
        )
        rows.append((r, quad.value, quad.abs_error, want, abs(quad.value - want)))
    ledger = _finish("oracle-agreement", samples, all(s.margin >= 0.0 for s in samples))
    series = [
        PlotSeries(
            "oracle",
            "real-space quadrature against the transform-side oracle",
            ("r", "value", "abs_error", "oracle", "diff"),
            rows,
        )
    ]
    return [ledger], series


def _decay_series(name, fit, ledger):
    rows = []
    for s in ledger.samples:
        if s.descriptor["kind"] != "decay":
            continue
        r = s.descriptor["r"]
        line = math.exp(fit.intercept) * r**fit.slope
        if fit.regime == "equal_n_log":
            line *= math.log(2.0 + r)
        rows.append((r, s.lhs, line))
    return PlotSeries(name, "far field of (-Delta)^sigma against the fitted power", ("r", "value", "fit"), rows)


def _run_decay(cfg: ExperimentConfig):
    field = field_from_descriptor(cfg.field)
    sigma = float(cfg.problem["sigma"])
    fit, ledger = verify_phi0_decay(field, sigma, cfg.sweeps.get("radii"), cfg.quadrature)
    return [fit, ledger], [_decay_series("decay", fit, ledger)]


def _cutoff_series(name, ledger):
    rows = [
        (s.descriptor["eps"], s.descriptor["d"], s.lhs, s.rhs, s.descriptor.get("lhs_err", 0.0))
        for s in ledger.samples
        if s.descriptor["kind"] == "cutoff"
    ]
    return PlotSeries(
        name,
        "|(-Delta)^sigma eta_eps| against the kind-specific envelope",
        ("eps", "d", "lhs", "envelope", "lhs_err"),
        rows,
    )


def _run_cutoff_bound(cfg: ExperimentConfig):
    cutoff = cutoff_from_descriptor(cfg.cutoff)
    sigma = float(cfg.problem["sigma"])
    ledger = verify_cutoff_bound(
        cutoff,
        sigma,
        cfg.sweeps["eps"],
        cfg.sweeps.get("x_grid"),
        cfg.sweeps.get("lambda"),
        cfg.quadrature,
    )
    return [ledger], [_cutoff_series("cutoff-bound", ledger)]


def _run_truncation(cfg: ExperimentConfig):
    field = field_from_descriptor(cfg.field)
    gamma = float(cfg.problem["gamma"])
    kw = {}
    if "sample_radii" in cfg.sweeps:
        kw["sample_radii"] = tuple(float(r) for r in cfg.sweeps["sample_radii"])
    if "far_radii" in cfg.sweeps:
        kw["far_radii"] = tuple(float(r) for r in cfg.sweeps["far_radii"])
    ledger = verify_truncation_convergence(field, gamma, cfg.sweeps["eps"], spec=cfg.quadrature, **kw)
    sup_rows = [
        (s.descriptor["eps"], s.lhs, s.descriptor["bar"])
        for s in ledger.samples
        if s.descriptor["kind"] == "sup-error"
    ]
    far_rows = [
        (s.descriptor["r"], s.lhs, s.rhs)
        for s in ledger.samples
        if s.descriptor["kind"] == "uniform-bound"
    ]
    series = [
        PlotSeries(
            "truncation-sup",
            "sup over the compact sample set of the truncation error",
            ("eps", "sup_error", "bar"),
            sup_rows,
        ),
        PlotSeries(
            "truncation-far",
            "eps-uniform far-field envelope of the truncations",
            ("r", "sup_value", "envelope"),
            far_rows,
        ),
    ]
    return [ledger], series


def _tube_ledger(cset, radii, n_samples, target, tol, seed, workers):
    fit = fit_lambda(cset, radii, n_samples=n_samples, seed=seed, workers=workers)
    sample = _sample(
        {
            "kind": "exponent",
            "set": cset.variant,
            "lambda_hat": fit.lambda_hat,
            "target": target,
            "r2": fit.r2,
        },
        abs(fit.lambda_hat - target),
        tol,
    )
    return fit, sample


def _run_tube(cfg: ExperimentConfig):
    cset = set_from_descriptor(cfg.set)
    target = float(cfg.sweeps.get("target", cset.nominal_dimension()))
    fit, sample = _tube_ledger(
        cset,
        cfg.sweeps["radii"],
        int(cfg.sweeps.get("n_samples", 400_000)),
        target,
        float(cfg.sweeps.get("tol", 0.1)),
        cfg.seed,
        cfg.workers,
    )
    ledger = _finish("tube-area-exponent", [sample], sample.margin >= 0.0)
    rows = list(zip(fit.radii, fit.areas, fit.cis))
    series = [
        PlotSeries("tube", "tube boundary area against r^(n-1-lambda)", ("r", "area", "ci95"), rows)
    ]
    return [ledger, fit], series


def _run_assouad(cfg: ExperimentConfig):
    cset = set_from_descriptor(cfg.set)
    target = float(cfg.sweeps.get("target", cset.nominal_dimension()))
    tol = float(cfg.sweeps.get("tol", 0.08))
    est = assouad_estimate(
        cset, cfg.sweeps["scale_pairs"], n_centers=int(cfg.sweeps.get("n_centers", 8))
    )
    sample = _sample(
        {"kind": "exponent", "set": cset.variant, "exponent": est.exponent, "target": target, "r2": est.r2},
        abs(est.exponent - target),
        tol,
    )
    ledger = _finish("assouad-covering", [sample], sample.margin >= 0.0)
    rows = [(r, big, count) for r, big, count in est.records]
    series = [
        PlotSeries("assouad", "local covering counts against (R/r)^exponent", ("r", "R", "cover_count"), rows)
    ]
    return [ledger], series


def _capacity_series(prefix, seq, ledger):
    energy_rows, cross_rows = [], []
    for s in ledger.samples:
        kind = s.descriptor["kind"]
        if kind == "energy-times-sk":
            k = s.descriptor["k"]
            energy_rows.append((k, s.descriptor["s_k"], s.descriptor["energy"], s.lhs))
        elif kind == "cross-energy":
            cross_rows.append((s.descriptor["eps_over_delta"], s.lhs))
    return [
        PlotSeries(
            prefix,
            "E(psi_k) S_k bounded along the capacity sequence",
            ("k", "s_k", "energy", "energy_times_sk"),
            energy_rows,
        ),
        PlotSeries(
            prefix + "-cross",
            "two-scale cross energy against (eps/delta)^(2 sigma)",
            ("eps_over_delta", "cross_energy"),
            cross_rows,
        ),
    ]


def _run_capacity(cfg: ExperimentConfig):
    cset = set_from_descriptor(cfg.set)
    sigma = float(cfg.problem["sigma"])
    seq = capacity_sequence(
        cset,
        sigma,
        int(cfg.problem.get("k_max", 6)),
        schedule_rule=str(cfg.problem.get("schedule", "factorial")),
        eps0=float(cfg.problem.get("eps0", 0.05)),
    )
    kw = {}
    if "slope_ratios" in cfg.sweeps:
        kw["slope_ratios"] = tuple(float(q) for q in cfg.sweeps["slope_ratios"])
    ledger = capacity_decay(seq, sigma, cfg.quadrature, **kw)
    return [ledger], _capacity_series("capacity", seq, ledger)


def _run_removability(cfg: ExperimentConfig):
    cset = set_from_descriptor(cfg.set)
    model = distance_power(cset, float(cfg.problem["beta"]))
    f_bounds = tuple(float(b) for b in cfg.problem.get("f_bounds", (1.0, 1.0)))
    kw = {}
    if "eps" in cfg.sweeps:
        kw["eps_sweep"] = tuple(float(e) for e in cfg.sweeps["eps"])
    if "n_shells" in cfg.sweeps:
        kw["n_shells"] = int(cfg.sweeps["n_shells"])
    ledger = removability_ledger(
        model, f_bounds, float(cfg.problem["p"]), float(cfg.problem["gamma"]), cset, **kw
    )
    by_eps = {}
    for s in ledger.samples:
        kind = s.descriptor["kind"]
        if kind == "mass-vs-oracle":
            by_eps.setdefault(s.descriptor["eps"], {})["mass"] = s.descriptor["exact"]
        elif kind == "weighted-mass":
            by_eps.setdefault(s.descriptor["eps"], {})["weighted"] = s.lhs
    rows = [(eps, v.get("mass"), v.get("weighted")) for eps, v in sorted(by_eps.items(), reverse=True)]
    series = [
        PlotSeries(
            "removability",
            "tube mass of the model and its weighted version eps^-2 gamma mass",
            ("eps", "mass", "weighted_mass"),
            rows,
        )
    ]
    return [ledger], series


def _run_bootstrap(cfg: ExperimentConfig):
    plan = bootstrap_exponents(
        int(cfg.problem["n"]), float(cfg.problem["gamma"]), float(cfg.problem["p"])
    )
    rows = [(m, s) for m, s in enumerate(plan.s_m, start=1)]
    series = [
        PlotSeries("bootstrap", "integrability exponents s_m of the bootstrap", ("m", "s_m"), rows)
    ]
    return [plan], series


def _superharmonic_series(name, ledger):
    cells = {}
    for s in ledger.samples:
        kind = s.descriptor["kind"]
        if kind not in ("nonnegativity", "sandwich-floor", "route-agreement"):
            continue
        key = (s.descriptor["sigma"], s.descriptor["r"])
        cell = cells.setdefault(key, {})
        if kind == "nonnegativity":
            cell["value"] = -s.lhs
        elif kind == "sandwich-floor":
            cell["floor"] = s.lhs
        else:
            cell["route_diff"], cell["allowance"] = s.lhs, s.rhs
    rows = [
        (sig, r, c.get("value"), c.get("floor"), c.get("route_diff"), c.get("allowance"))
        for (sig, r), c in sorted(cells.items())
    ]
    return PlotSeries(
        name,
        "(-Delta)^sigma of the potential: value, sandwich floor, route gap",
        ("sigma", "r", "value", "floor", "route_diff", "allowance"),
        rows,
    )


def _run_superharmonic(cfg: ExperimentConfig):
    field = field_from_descriptor(cfg.field)
    ledger = superharmonic_check(
        field,
        float(cfg.problem["gamma"]),
        [float(s) for s in cfg.problem["sigma_list"]],
        cfg.sweeps.get("radii"),
        cfg.quadrature,
    )
    return [ledger], [_superharmonic_series("superharmonic", ledger)]


# ---------------------------------------------------------------------------
# The suite: the full battery, one check per estimate family. Configurations
# are frozen here so that a fixed (seed, workers) pair fixes every byte of
# the report.
# ---------------------------------------------------------------------------


def _suite_decay(spec):
    objects, series = [], []
    for rho in (1.0, 3.0, 5.0):
        fit, ledger = verify_phi0_decay(ShiftedPower(rho, 3), 0.5, spec=spec)
        objects.extend([fit, ledger])
        series.append(_decay_series(f"decay-rho-{rho:g}", fit, ledger))
    return objects, series


def _suite_point_cutoff(spec):
    template = point_cutoff(2.0**-3, 1.0, 1)
    eps = [2.0**-k for k in range(3, 8)]
    ledger = verify_cutoff_bound(template, 0.5, eps, spec=spec)
    return [ledger], [_cutoff_series("point-cutoff", ledger)]


def _suite_fermi_cutoff(spec):
    template = manifold_cutoff(CircleInR3(10.0), 4e-3, 2.5)
    eps = [4e-3, 2e-3, 1e-3, 5e-4]
    ledger = verify_cutoff_bound(template, 0.5, eps, spec=replace(spec, mc_samples=400_000))
    return [ledger], [_cutoff_series("fermi-cutoff", ledger)]


def _suite_tube_cutoff(spec):
    template = tube_cutoff(FinitePoints([[0.0]]), 2.0**-3)
    eps = [2.0**-k for k in range(3, 6)]
    ledger = verify_cutoff_bound(template, 0.5, eps, spec=spec)
    return [ledger], [_cutoff_series("tube-cutoff", ledger)]


def _suite_truncation(spec):
    eps = [2.0**-k for k in range(2, 7)]
    ledger = verify_truncation_convergence(ShiftedPower(2.5, 3), 0.5, eps, spec=spec)
    return [ledger], []


def _suite_tube_exponents(seed, workers):
    jobs = [
        (FinitePoints([[0.0, 0.0, 0.0]]), np.geomspace(0.01, 1.0, 7), 200_000, 0.0),
        # Endcap caps the usable radii: the r^2 term in 2 pi L r + 4 pi r^2
        # pollutes the slope once r is comparable to L.
        (Segment([0.0, 0.0, -0.5], [0.0, 0.0, 0.5]), np.geomspace(5e-4, 0.05, 7), 200_000, 1.0),
        (CircleInR3(1.0), np.geomspace(0.005, 0.5, 7), 400_000, 1.0),
    ]
    objects, series, samples = [], [], []
    for cset, radii, n_samples, target in jobs:
        fit, sample = _tube_ledger(cset, radii, n_samples, target, 0.1, seed, workers)
        samples.append(sample)
        objects.append(fit)
        series.append(
            PlotSeries(
                f"tube-{cset.variant}",
                "tube boundary area against r^(n-1-lambda)",
                ("r", "area", "ci95"),
                list(zip(fit.radii, fit.areas, fit.cis)),
            )
        )
    ledger = _finish("tube-area-exponent", samples, all(s.margin >= 0.0 for s in samples))
    return [ledger, *objects], series


def _suite_assouad():
    cset = ProductCantor(1.0 / 3.0, 8)
    pairs = [(3.0**-k, 1.0) for k in range(3, 7)] + [(3.0**-5, 3.0**-1), (3.0**-6, 3.0**-2)]
    est = assouad_estimate(cset, pairs)
    target = cset.nominal_dimension()
    sample = _sample(
        {"kind": "exponent", "set": cset.variant, "exponent": est.exponent, "target": target, "r2": est.r2},
        abs(est.exponent - target),
        0.08,
    )
    ledger = _finish("assouad-covering", [sample], sample.margin >= 0.0)
    rows = [(r, big, count) for r, big, count in est.records]
    series = [
        PlotSeries("assouad-cantor", "local covering counts against (R/r)^exponent", ("r", "R", "cover_count"), rows)
    ]
    return [ledger], series


def _suite_capacity(spec):
    seq = capacity_sequence(FinitePoints([[0.0]]), 0.5, 4)
    ledger = capacity_decay(seq, 0.5, spec, slope_ratios=(2.0**-2, 2.0**-3, 2.0**-4, 2.0**-5))
    return [ledger], _capacity_series("capacity", seq, ledger)


def _suite_removability():
    cset = FinitePoints([[0.0, 0.0, 0.0]])
    ledger = removability_ledger(distance_power(cset, 2.0), (1.0, 1.0), 1.5, 0.5, cset)
    return [ledger], []


def _suite_bootstrap():
    plans = [bootstrap_exponents(3, 0.5, 1.2), bootstrap_exponents(3, 1.4, 2.0)]
    rows = [(m, s) for m, s in enumerate(plans[0].s_m, start=1)]
    series = [
        PlotSeries("bootstrap", "integrability exponents s_m of the bootstrap", ("m", "s_m"), rows)
    ]
    return plans, series


def _suite_superharmonic(spec):
    ledger = superharmonic_check(
        BallIndicator(1.0, 3), 0.8, (0.2, 0.5), np.geomspace(0.05, 12.0, 10), spec
    )
    return [ledger], [_superharmonic_series("superharmonic", ledger)]


def _run_suite(cfg: ExperimentConfig, manifest: RunManifest):
    spec = cfg.quadrature
    checks = [
        ("bubble-identity", lambda: ([bubble_identity_ledger(spec)], [])),
        ("power-law-mapping", lambda: ([power_law_ledger(spec)], [])),
        ("far-field-decay", lambda: _suite_decay(spec)),
        ("point-cutoff-bound", lambda: _suite_point_cutoff(spec)),
        ("fermi-cutoff-bound", lambda: _suite_fermi_cutoff(spec)),
        ("tube-cutoff-bound", lambda: _suite_tube_cutoff(spec)),
        ("truncation-convergence", lambda: _suite_truncation(spec)),
        ("tube-area-exponent", lambda: _suite_tube_exponents(cfg.seed, cfg.workers)),
        ("assouad-covering", lambda: _suite_assouad()),
        ("capacity-decay", lambda: _suite_capacity(spec)),
        ("removability-mass", lambda: _suite_removability()),
        ("bootstrap-plan", lambda: _suite_bootstrap()),
        ("superharmonicity", lambda: _suite_superharmonic(spec)),
        ("distance-function", lambda: ([distance_function_ledger(seed=cfg.seed)], [])),
    ]
    doc_checks = {}
    all_series = []
    passed = True
    for name, runner in checks:
        objects, series = runner()
        payloads = [report_payload(o) for o in objects]
        doc_checks[name] = payloads
        passed &= _all_pass(payloads)
        for s in series:
            all_series.append(PlotSeries(f"{name}--{s.name}", s.inequality, s.columns, s.rows))
        manifest.stage(name)
    document = {"command": "suite", "checks": doc_checks, "pass": passed}
    return document, all_series


# ---------------------------------------------------------------------------
# Driver.
# ---------------------------------------------------------------------------

_RUNNERS = {
    "eval": _run_eval,
    "oracle": _run_oracle,
    "decay": _run_decay,
    "cutoff-bound": _run_cutoff_bound,
    "truncation": _run_truncation,
    "tube": _run_tube,
    "assouad": _run_assouad,
    "capacity": _run_capacity,
    "removability": _run_removability,
    "bootstrap": _run_bootstrap,
    "superharmonic": _run_superharmonic,
}


def _all_pass(payloads) -> bool:
    ok = True
    for p in payloads:
        if isinstance(p, dict) and p.get("type") == "ledger":
            ok &= bool(p["pass"])
    return ok


def run(cfg: ExperimentConfig) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(
        command=cfg.command, config=cfg.to_dict(), seed=cfg.seed, workers=cfg.workers
    ).start()
    try:
        if cfg.command == "suite":
            document, series = _run_suite(cfg, manifest)
        else:
            objects, series = _RUNNERS[cfg.command](cfg)
            manifest.stage("run")
            payloads = [report_payload(o) for o in objects]
            document = {"command": cfg.command, "reports": payloads, "pass": _all_pass(payloads)}
    except FracLabError as exc:
        manifest.error = f"{type(exc).__name__}: {exc}"
        manifest.finish().write(out)
        print(f"run failed: {manifest.error}", file=sys.stderr)
        return 3
    paths = [write_report(out, document)]
    if series:
        paths += emit_plot_data(out, series)
    manifest.outputs = [p.name for p in paths]
    manifest.stage("write")
    manifest.finish().write(out)
    return 0 if document["pass"] else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fraclab",
        description="Numerical ledger for fractional-Laplacian estimates.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to the experiment JSON")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--workers", type=int, default=None, help="override the worker count")
    parser.add_argument("--out", default=None, help="override the output directory")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if cfg.command != args.command:
            raise ConfigInvalid(
                f"config is for command {cfg.command!r}, invoked as {args.command!r}"
            )
        cfg = cfg.with_overrides(seed=args.seed, workers=args.workers, out_dir=args.out)
    except ConfigInvalid as exc:
        print(f"config rejected: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

"""Experiment runner: config-driven pipelines with seeded reproducibility
and machine-readable CSV/JSON outputs plus a digest manifest.

Usage: srblab <subcommand> <config.yaml> [--output-dir DIR]

The output directory may also be overridden with the SRBLAB_OUTPUT_DIR
environment variable.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import maps, measure, response, tangency
from .config import ExperimentConfig
from .errors import (BasinEscapeError, ConfigError, FrameMisalignmentError,
                     HyperbolicityError, InsufficientDataError,
                     NumericalDegeneracyError, OrbitEscapeError,
                     PadeDegeneracyError, ParameterError, SrbLabError,
                     UnsupportedDimensionError)
from .tangent import (TangentCocycle, benettin_spectrum, compute_clvs,
                      covariance_residuals, splitting_angles)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERACY = 3
EXIT_BASIN = 4
EXIT_INSUFFICIENT = 5

_ERROR_CODES = [
    ((ConfigError, ParameterError), EXIT_CONFIG),
    ((NumericalDegeneracyError, HyperbolicityError,
      UnsupportedDimensionError, PadeDegeneracyError), EXIT_DEGENERACY),
    ((BasinEscapeError, OrbitEscapeError, FrameMisalignmentError), EXIT_BASIN),
    ((InsufficientDataError,), EXIT_INSUFFICIENT),
]


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    return f"{float(x):.17g}"


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else repr(x)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(path, payload):
    Path(path).write_text(
        json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _sha256(path):
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Shared pipeline pieces
# ---------------------------------------------------------------------------


def _family(cfg):
    sysc = cfg.require("system")
    return maps.get_family(sysc["name"], sysc.get("params"))


def _alpha(cfg):
    return float(cfg.require("alpha"))


def _sampler(cfg, family):
    sc = cfg.get("sampler")
    if sc is None:
        return measure.default_sampler(family)
    return measure.BoxSampler(tuple(sc["low"]), tuple(sc["high"]))


def _observable(cfg, family, key="observable"):
    return maps.get_observable(cfg.require(key), family.dimension)


def _srb(cfg, family, alpha, seed_shift=0):
    oc = cfg.get("orbit")
    return measure.srb_sample(
        family, alpha, sampler=_sampler(cfg, family),
        transient=oc["transient"], length=oc["length"],
        ensemble=oc["ensemble"], seed=int(cfg.get("seed")) + seed_shift)


def _single_orbit(cfg, family, alpha, length, seed_shift=0):
    rng = np.random.default_rng(int(cfg.get("seed")) + seed_shift)
    x0 = _sampler(cfg, family).draw(rng, 1)[0]
    transient = cfg.get("orbit.transient")
    x0 = maps.iterate(family, alpha, x0, transient)[-1]
    return maps.iterate(family, alpha, x0, length)


def _spectrum_payload(spec):
    payload = {
        "exponents": spec.all_exponents,
        "stderr": spec.all_stderr,
        "distinct": spec.exponents,
        "multiplicities": spec.multiplicities,
        "sum": spec.sum(),
        "mean_log_det": spec.mean_log_det,
        "n_steps": spec.n_steps,
    }
    try:
        dims = measure.dimension_estimates(spec)
        payload["kaplan_yorke"] = dims.kaplan_yorke
        payload["d_s"] = dims.d_s
        payload["d_s_interval"] = dims.d_s_interval
        payload["d_s_method"] = dims.method
    except HyperbolicityError:
        payload["d_s_method"] = "non-hyperbolic"
    return payload


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_lyapunov(cfg, outdir):
    family = _family(cfg)
    alpha = _alpha(cfg)
    sc = cfg.get("spectrum")
    orbit = _single_orbit(cfg, family, alpha, sc["steps"])
    cocycle = TangentCocycle.from_orbit(family, alpha, orbit)
    spec = benettin_spectrum(cocycle, reorth_interval=sc["reorth_interval"])
    write_csv(outdir / "spectrum.csv", ["index", "exponent", "stderr"],
              [(i, spec.all_exponents[i], spec.all_stderr[i])
               for i in range(spec.dimension)])
    write_json(outdir / "spectrum.json", _spectrum_payload(spec))
    return {"steps": spec.n_steps}


def cmd_clv(cfg, outdir):
    family = _family(cfg)
    alpha = _alpha(cfg)
    orbit = _single_orbit(cfg, family, alpha, cfg.get("orbit.length"))
    cocycle = TangentCocycle.from_orbit(family, alpha, orbit)
    splitting = compute_clvs(cocycle, warmup=cfg.get("clv.warmup"))
    angles = splitting_angles(splitting)
    res_u, res_s = covariance_residuals(splitting, cocycle)
    write_csv(outdir / "angles.csv", ["step", "angle"],
              [(splitting.offset + i, a) for i, a in enumerate(angles)])
    write_json(outdir / "clv.json", {
        "min_angle": float(angles.min()),
        "max_covariance_residual_u": float(res_u.max()),
        "max_covariance_residual_s": float(res_s.max()),
        "n_unstable": splitting.n_unstable,
        "spectrum": _spectrum_payload(splitting.spectrum),
    })
    return {"points": int(angles.size)}


def cmd_srb(cfg, outdir):
    family = _family(cfg)
    alpha = _alpha(cfg)
    emp = _srb(cfg, family, alpha)
    header = [f"x{i}" for i in range(family.dimension)]
    write_csv(outdir / "points.csv", header, emp.points)
    write_json(outdir / "srb.json", {
        "n_points": len(emp), "n_escaped": emp.n_escaped,
        "ensemble": emp.n_members, "length": emp.length,
    })
    return {"points": len(emp)}


def cmd_correlate(cfg, outdir):
    family = _family(cfg)
    alpha = _alpha(cfg)
    emp = _srb(cfg, family, alpha)
    phi = _observable(cfg, family)
    psi = (maps.get_observable(cfg.get("observable2"), family.dimension)
           if cfg.get("observable2") else phi)
    series = measure.correlation(emp, psi, phi, cfg.get("correlation.n_max"))
    write_csv(outdir / "correlation.csv", ["lag", "value", "stderr"],
              zip(series.lags, series.values, series.stderr))
    write_json(outdir / "correlation.json", {
        "decay_rate": series.decay_rate,
        "decay_rate_ci": series.decay_rate_ci,
        "fit_r2": series.fit_r2,
        "fit_window": series.fit_window,
        "fit_undefined": series.fit_undefined,
    })
    return {"lags": int(series.lags.size)}


def _susceptibility_series(cfg, family, alpha):
    emp = _srb(cfg, family, alpha)
    phi = _observable(cfg, family)
    field = maps.PerturbationField(family, alpha)
    return response.susceptibility_coefficients(
        emp, field, phi, cfg.get("susceptibility.n_max")), emp, phi


def cmd_susceptibility(cfg, outdir):
    series, _, _ = _susceptibility_series(cfg, _family(cfg), _alpha(cfg))
    write_csv(outdir / "susceptibility.csv", ["n", "kappa", "stderr"],
              [(n, series.coeffs[n], series.stderr[n])
               for n in range(series.coeffs.size)])
    write_json(outdir / "susceptibility.json", series.meta)
    return {"coefficients": int(series.coeffs.size)}


def cmd_radius(cfg, outdir):
    series, _, _ = _susceptibility_series(cfg, _family(cfg), _alpha(cfg))
    est = response.radius_estimate(series, method=cfg.get("radius.method"))
    write_csv(outdir / "susceptibility.csv", ["n", "kappa", "stderr"],
              [(n, series.coeffs[n], series.stderr[n])
               for n in range(series.coeffs.size)])
    write_json(outdir / "radius.json", {
        "method": est.method, "value": est.value, "ci": est.ci,
        "fit_window": est.fit_window, "indeterminate": est.indeterminate,
        "flag": est.flag, "poles": est.poles,
        "screened_poles": est.screened_poles,
    })
    return {"coefficients": int(series.coeffs.size)}


def cmd_response_check(cfg, outdir):
    family = _family(cfg)
    alpha = _alpha(cfg)
    series, _, phi = _susceptibility_series(cfg, family, alpha)
    psi_one, psi_err = series.truncated_sum(1.0)
    oc = cfg.get("orbit")
    sampling = response.SamplingConfig(
        transient=oc["transient"], length=oc["length"],
        ensemble=oc["ensemble"], sampler=_sampler(cfg, family),
        seed=int(cfg.get("seed")) + 1)
    fd = response.finite_difference_response(
        family, alpha, cfg.get("response.h"), phi, sampling,
        richardson=cfg.get("response.richardson"))
    cmp = response.ResponseComparison(psi_one, psi_err,
                                      fd.derivative, fd.stderr)
    write_json(outdir / "response.json", {
        "psi_one": cmp.psi_one, "psi_one_err": cmp.psi_one_err,
        "derivative": cmp.derivative, "derivative_err": cmp.derivative_err,
        "discrepancy_sigma": cmp.discrepancy_sigma,
        "h": cfg.get("response.h"),
        "agrees_3sigma": cmp.discrepancy_sigma < 3.0,
    })
    return {"coefficients": int(series.coeffs.size)}


def cmd_split(cfg, outdir):
    family = _family(cfg)
    alpha = _alpha(cfg)
    emp = _srb(cfg, family, alpha)
    phi = _observable(cfg, family)
    field = maps.PerturbationField(family, alpha)
    sp = cfg.get("split")
    result = response.stable_unstable_split(
        emp, field, phi, sp["n_max"], clv_warmup=cfg.get("clv.warmup"),
        backsteps=sp["backsteps"], final_halfwidth=sp["final_halfwidth"],
        angle_threshold=sp["angle_threshold"])
    sig = result.reconstruction_sigma()
    rows = []
    for n in range(result.direct.coeffs.size):
        rows.append((n, result.direct.coeffs[n], result.direct.stderr[n],
                     result.stable.coeffs[n], result.stable.stderr[n],
                     result.unstable.coeffs[n], result.unstable.stderr[n],
                     sig[n]))
    write_csv(outdir / "split.csv",
              ["n", "direct", "direct_se", "stable", "stable_se",
               "unstable", "unstable_se", "reconstruction_sigma"], rows)
    write_json(outdir / "split.json", {
        "excluded_fraction": result.excluded_fraction,
        "min_angle": result.min_angle,
        "max_reconstruction_sigma": float(np.max(sig)),
    })
    return {"coefficients": int(result.direct.coeffs.size)}


def cmd_tangency(cfg, outdir):
    family = _family(cfg)
    alpha = _alpha(cfg)
    orbit = _single_orbit(cfg, family, alpha, cfg.get("orbit.length"))
    cocycle = TangentCocycle.from_orbit(family, alpha, orbit)
    splitting = compute_clvs(cocycle, warmup=cfg.get("clv.warmup"))
    angles = splitting_angles(splitting)
    tc = cfg.get("tangency")
    folds = tangency.detect_folds(splitting.points, angles,
                                  tc["angle_threshold"], chart=family.chart,
                                  cluster_radius=tc["cluster_radius"])
    write_csv(outdir / "folds.csv",
              [f"x{i}" for i in range(family.dimension)] + ["angle"],
              [tuple(p) + (a,) for p, a in zip(folds.points, folds.angles)])
    payload = {
        "min_angle": float(angles.min()),
        "n_fold_points": int(folds.points.shape[0]),
        "n_clusters": int(folds.representatives.shape[0]),
        "spectrum": _spectrum_payload(splitting.spectrum),
    }
    frame_cfg = tc.get("frame")
    if frame_cfg is not None and folds.points.shape[0] >= 100:
        frame = tangency.TransversalFrame(tuple(frame_cfg["base"]),
                                          tuple(frame_cfg["direction"]))
        sel = angles < tc["angle_threshold"]
        stable_dirs = splitting.clvs[sel][:, :, 1]
        proj = tangency.project_along_stable(
            folds.points, stable_dirs, frame,
            min_angle=tc["min_projection_angle"], chart=family.chart)
        counting = tangency.counting_function(proj.theta, proj.weights)
        payload["d_bar"] = counting.exponent
        payload["d_bar_ci"] = counting.exponent_ci
        payload["holder_constant"] = counting.holder_constant
        payload["counting_flag"] = counting.flag
    write_json(outdir / "tangency.json", payload)
    return {"points": int(angles.size)}


def _sigma_from_cfg(scfg):
    kind = scfg["kind"]
    kwargs = {k: v for k, v in scfg.items() if k != "kind"}
    if kind == "atoms":
        kwargs = {"positions": tuple(kwargs["positions"]),
                  "weights": tuple(kwargs["weights"])}
    return tangency.make_sigma(kind, **kwargs)


def cmd_fold_synthetic(cfg, outdir):
    syn = cfg.get("synthetic")
    if "sigma" not in syn:
        raise ConfigError("missing required configuration key: synthetic.sigma")
    sigma = _sigma_from_cfg(syn["sigma"])
    profile = tangency.synthetic_fold_convolution(
        sigma, syn["grid"], side=syn["side"], domain=tuple(syn["domain"]))
    spacing = profile.grid[1] - profile.grid[0]
    est = tangency.holder_exponent(profile.values, spacing)
    write_csv(outdir / "profile.csv", ["theta", "value"],
              zip(profile.grid, profile.values))
    write_json(outdir / "synthetic.json", {
        "sigma_dimension": sigma.dimension,
        "predicted_exponent": sigma.dimension - 0.5,
        "holder_exponent": est.exponent,
        "holder_ci": est.ci,
        "fit_range": est.fit_range,
        "reliable": est.reliable,
        "flag": est.flag,
    })
    return {"grid": int(profile.grid.size)}


def cmd_conjecture_report(cfg, outdir):
    systems = cfg.require("report.systems")
    rows = []
    for i, entry in enumerate(systems):
        sub = ExperimentConfig({**{k: v for k, v in cfg.resolved().items()
                                   if k not in ("report", "system", "alpha")},
                                "system": {"name": entry["name"],
                                           "params": entry.get("params", {})},
                                "alpha": entry["alpha"]})
        family = _family(sub)
        alpha = float(entry["alpha"])
        row = {"system": entry["name"], "alpha": alpha}
        orbit = _single_orbit(sub, family, alpha, sub.get("spectrum.steps"),
                              seed_shift=100 + i)
        cocycle = TangentCocycle.from_orbit(family, alpha, orbit)
        spec = benettin_spectrum(
            cocycle, reorth_interval=sub.get("spectrum.reorth_interval"))
        try:
            dims = measure.dimension_estimates(spec)
            row["d_s"] = dims.d_s
            row["d_s_method"] = dims.method
        except HyperbolicityError:
            row["d_s"] = None
            row["d_s_method"] = "non-hyperbolic"
        emp = _srb(sub, family, alpha, seed_shift=200 + i)
        phi = _observable(sub, family)
        corr = measure.correlation(emp, phi, phi,
                                   sub.get("correlation.n_max"))
        row["mixing_rate"] = corr.decay_rate
        row["mixing_fit_undefined"] = corr.fit_undefined
        field = maps.PerturbationField(family, alpha)
        series = response.susceptibility_coefficients(
            emp, field, phi, sub.get("susceptibility.n_max"))
        est = response.radius_estimate(series,
                                       method=sub.get("radius.method"))
        row["radius"] = est.value
        row["radius_ci"] = est.ci
        row["radius_indeterminate"] = est.indeterminate
        psi_one, psi_err = series.truncated_sum(1.0)
        row["psi_one"] = psi_one
        row["psi_one_err"] = psi_err
        row["psi_one_status"] = ("resolved"
                                 if abs(psi_one) > 3 * psi_err
                                 else "consistent-with-zero")
        rows.append(row)
    write_json(outdir / "report.json", {"systems": rows})
    return {"systems": len(rows)}


COMMANDS = {
    "lyapunov": cmd_lyapunov,
    "clv": cmd_clv,
    "srb": cmd_srb,
    "correlate": cmd_correlate,
    "susceptibility": cmd_susceptibility,
    "radius": cmd_radius,
    "response-check": cmd_response_check,
    "split": cmd_split,
    "tangency": cmd_tangency,
    "fold-synthetic": cmd_fold_synthetic,
    "conjecture-report": cmd_conjecture_report,
}


def run(subcommand, config_path, output_dir=None):
    """Run one subcommand; returns the exit code."""
    try:
        if subcommand not in COMMANDS:
            raise ConfigError(f"unknown subcommand {subcommand!r}")
        cfg = ExperimentConfig.load(config_path)
        outdir = Path(output_dir
                      or os.environ.get("SRBLAB_OUTPUT_DIR")
                      or cfg.get("output_dir"))
        outdir.mkdir(parents=True, exist_ok=True)
        cfg.dump_resolved(outdir / "resolved_config.json")
        counts = COMMANDS[subcommand](cfg, outdir)
    except SrbLabError as exc:
        code = EXIT_CONFIG
        for types, c in _ERROR_CODES:
            if isinstance(exc, types):
                code = c
                break
        diag = {"error_type": type(exc).__name__, "message": str(exc),
                "subcommand": subcommand}
        try:
            outdir = Path(output_dir
                          or os.environ.get("SRBLAB_OUTPUT_DIR") or "out")
            outdir.mkdir(parents=True, exist_ok=True)
            write_json(outdir / "diagnostics.json", diag)
        except OSError:
            pass
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return code
    outputs = []
    for p in sorted(outdir.iterdir()):
        if p.name == "manifest.json" or not p.is_file():
            continue
        outputs.append({"path": p.name, "sha256": _sha256(p)})
    write_json(outdir / "manifest.json", {
        "artifact_version": "0.1.0",
        "subcommand": subcommand,
        "config": cfg.resolved(),
        "outputs": outputs,
        "counts": counts,
    })
    return EXIT_OK


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="srblab",
        description="Linear-response numerics for chaotic diffeomorphisms")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="path to the YAML experiment config")
        p.add_argument("--output-dir", default=None)
    args = parser.parse_args(argv)
    return run(args.subcommand, args.config, args.output_dir)


if __name__ == "__main__":
    sys.exit(main())

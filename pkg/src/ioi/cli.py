"""Batch front door: JSON analysis configs in, JSON/CSV reports out.

One analysis per invocation. ``ioi run config.json [--seed N] [--out PATH]``
dispatches on the config's ``mode`` and writes the report atomically;
``ioi validate config.json`` checks a config without running it. Errors are
emitted as one structured JSON record on stderr, with the exit code keyed
to the failure family:

    0  success
    2  a route's applicability gate refused the analysis
    3  invalid input (config, data file, or parameter validation)
    4  numerical failure (empty region, degenerate update, undefined
       ratio, aborted chain, or other numerical breakdown)

Reports embed the engine version, the effective seed and an echo of the
config; re-running the echoed config with the same seed reproduces the
report byte for byte (reports carry no timestamps or absolute paths).
Stochastic modes (gibbs, scan-sensitivity) require a seed, from the config
or ``--seed``. Relative paths inside a config resolve against the config
file's directory; ``--out`` resolves against the working directory.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .bayes import (
    NormalPrior,
    conjugate_normal_update,
    grid_bayes_update,
    normal_mean_likelihood,
    uniform_grid_prior,
)
from .bispatial import (
    P_VALUE_THRESHOLD,
    BispatialConfig,
    assess_region_probability,
    default_odds_calibration,
    one_sided_p_value,
)
from .compose import ioi_pipeline
from .density import DEFAULT_GRID_POINTS, Density1D
from .exceptions import (
    AnalogyRejected,
    ChainAborted,
    InferenceError,
    InputError,
)
from .fiducial import (
    DataSummary,
    fiducial_density,
    fiducial_region_probability,
    normal_mean_pivot,
)
from .gibbs import (
    ConditionalSet,
    ConditionalSpec,
    ScanOrder,
    build_conditional_set,
    bivariate_normal_mean_family,
    canonical_compatible_set,
    canonical_incompatible_set,
    check_compatibility,
    gibbs_run,
    scan_sensitivity,
)

__all__ = ["main", "run_main", "ingest_csv"]

MODES = (
    "fiducial",
    "bayes",
    "bispatial",
    "compose-pipeline",
    "gibbs",
    "scan-sensitivity",
)
STOCHASTIC_MODES = ("gibbs", "scan-sensitivity")

CALIBRATIONS = {"odds-default": default_odds_calibration}

_QUANTILE_LEVELS = (0.025, 0.25, 0.5, 0.75, 0.975)

_COMMON_KEYS = {"mode", "data", "seed", "out", "grid_points"}
_ALLOWED_KEYS = {
    "fiducial": _COMMON_KEYS | {"prior_knowledge", "region"},
    "bayes": _COMMON_KEYS | {"prior"},
    "bispatial": _COMMON_KEYS | {"bispatial"},
    "compose-pipeline": _COMMON_KEYS | {"bispatial", "prior_knowledge"},
    "gibbs": (_COMMON_KEYS - {"data"})
    | {"model", "scan", "iterations", "burn_in", "init", "draws_csv", "check_compatibility"},
    "scan-sensitivity": (_COMMON_KEYS - {"data"})
    | {"model", "scans", "iterations", "burn_in", "init"},
}


def ingest_csv(path: Path, sigma2: float) -> DataSummary:
    """Read a single-column CSV (header ``value``) into a data summary."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read data file {path}: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    rows = [row for row in rows if row]
    if not rows:
        raise InputError(f"data file {path} is empty")
    header = [cell.strip() for cell in rows[0]]
    if header != ["value"]:
        raise InputError(
            f"data file {path} must have the single header 'value', got {header!r}"
        )
    if len(rows) == 1:
        raise InputError(f"data file {path} has a header but no rows")
    values = []
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != 1:
            raise InputError(f"{path} row {i}: expected one column, got {len(row)}")
        cell = row[0].strip()
        try:
            value = float(cell)
        except ValueError:
            raise InputError(f"{path} row {i}: not numeric: {cell!r}") from None
        if not math.isfinite(value):
            raise InputError(f"{path} row {i}: not finite: {cell!r}")
        values.append(value)
    return DataSummary.from_values(values, sigma2)


def _require_dict(payload, name: str) -> dict:
    if not isinstance(payload, dict):
        raise InputError(f"{name} must be a JSON object")
    return payload


def _parse_data(config: dict, base: Path) -> DataSummary:
    block = _require_dict(config.get("data"), "'data'")
    if "sigma2" not in block:
        raise InputError("'data' needs a known 'sigma2'")
    sources = [key for key in ("values", "csv", "mean") if key in block]
    if len(sources) != 1:
        raise InputError(
            "'data' needs exactly one of 'values', 'csv' or 'mean'/'n', "
            f"got {sources or 'none'}"
        )
    if "values" in block:
        return DataSummary.from_values(block["values"], block["sigma2"])
    if "csv" in block:
        return ingest_csv(base / str(block["csv"]), block["sigma2"])
    if "n" not in block:
        raise InputError("'data' with 'mean' also needs 'n'")
    return DataSummary.from_dict(
        {"mean": block["mean"], "n": block["n"], "sigma2": block["sigma2"]}
    )


def _parse_prior(config: dict):
    block = _require_dict(config.get("prior"), "'prior'")
    kind = block.get("type")
    if kind == "normal":
        for key in ("mean", "variance"):
            if key not in block:
                raise InputError(f"normal prior needs '{key}'")
        return NormalPrior(block["mean"], block["variance"])
    if kind == "grid":
        for key in ("lo", "hi"):
            if key not in block:
                raise InputError(f"grid prior needs '{key}'")
        n = int(block.get("grid_points", DEFAULT_GRID_POINTS))
        if "weights" in block:
            weights = np.asarray(block["weights"], dtype=float)
            return Density1D.grid(block["lo"], block["hi"], weights)
        return uniform_grid_prior(block["lo"], block["hi"], n)
    raise InputError(f"prior 'type' must be 'normal' or 'grid', got {kind!r}")


def _parse_bispatial(config: dict) -> BispatialConfig:
    block = _require_dict(config.get("bispatial"), "'bispatial'")
    for key in ("epsilon", "pre_data_mass"):
        if key not in block:
            raise InputError(f"'bispatial' needs '{key}'")
    name = block.get("calibration", "odds-default")
    if name not in CALIBRATIONS:
        raise InputError(
            f"unknown calibration {name!r}; known: {sorted(CALIBRATIONS)}"
        )
    return BispatialConfig(
        epsilon=block["epsilon"],
        pre_data_mass=block["pre_data_mass"],
        calibration=CALIBRATIONS[name],
        p_value_threshold=block.get("p_value_threshold", P_VALUE_THRESHOLD),
    )


def _parse_model(config: dict) -> ConditionalSet:
    block = _require_dict(config.get("model"), "'model'")
    kind = block.get("type")
    if kind == "canonical_compatible":
        return canonical_compatible_set(float(block.get("rho", 0.7)))
    if kind == "canonical_incompatible":
        return canonical_incompatible_set()
    if kind != "bivariate_normal_mean":
        raise InputError(
            "model 'type' must be 'bivariate_normal_mean', "
            f"'canonical_compatible' or 'canonical_incompatible', got {kind!r}"
        )
    for key in ("means", "sigma2s", "correlation", "n"):
        if key not in block:
            raise InputError(f"bivariate_normal_mean model needs '{key}'")
    means = tuple(float(v) for v in block["means"])
    sigma2s = tuple(float(v) for v in block["sigma2s"])
    if len(means) != 2 or len(sigma2s) != 2:
        raise InputError("'means' and 'sigma2s' must each have two entries")
    makers = bivariate_normal_mean_family(
        means, sigma2s, block["correlation"], int(block["n"])
    )
    methods = block.get("methods", ["fiducial", "fiducial"])
    if not isinstance(methods, list) or len(methods) != 2:
        raise InputError("'methods' must list one method per coordinate (two)")
    priors = block.get("priors", [None, None])
    if not isinstance(priors, list) or len(priors) != 2:
        raise InputError("'priors' must list one entry per coordinate (two)")
    specs = []
    for maker, method, prior_block in zip(makers, methods, priors):
        prior = None
        if prior_block is not None:
            prior_block = _require_dict(prior_block, "prior entry")
            prior = NormalPrior(prior_block["mean"], prior_block["variance"])
        specs.append(ConditionalSpec(method=method, make_summary=maker, prior=prior))
    return build_conditional_set(specs, probe=means)


def _parse_scan(payload) -> ScanOrder:
    return ScanOrder.from_dict(_require_dict(payload, "scan"))


def _density_summary(density: Density1D) -> dict:
    if density.form == "normal":
        mean = density.mean
        sd = density.sd
        support = None
    else:
        nodes = density.nodes
        h = density.spacing
        w = np.full(nodes.size, h)
        w[0] = w[-1] = 0.5 * h
        mass = float(w @ density.weights)
        mean = float(w @ (nodes * density.weights)) / mass
        var = float(w @ ((nodes - mean) ** 2 * density.weights)) / mass
        sd = math.sqrt(max(var, 0.0))
        support = [float(density.lo), float(density.hi)]
    return {
        "form": density.form,
        "mean": float(mean),
        "sd": float(sd),
        "support": support,
        "quantiles": {
            str(level): float(density.quantile(level)) for level in _QUANTILE_LEVELS
        },
    }


def _effective_seed(config: dict, override: int | None, mode: str) -> int:
    seed = override if override is not None else config.get("seed")
    if seed is None:
        if mode in STOCHASTIC_MODES:
            raise InputError(
                f"mode {mode!r} is stochastic: a seed is required "
                "(config 'seed' or --seed)"
            )
        return 0
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise InputError(f"seed must be a nonnegative integer, got {seed!r}")
    return seed


def _load_config(path: Path) -> dict:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from exc
    config = _require_dict(config, "config")
    mode = config.get("mode")
    if mode not in MODES:
        raise InputError(f"'mode' must be one of {list(MODES)}, got {mode!r}")
    unknown = set(config) - _ALLOWED_KEYS[mode]
    if unknown:
        raise InputError(
            f"unknown config keys for mode {mode!r}: {sorted(unknown)}"
        )
    return config


def _grid_points(config: dict) -> int:
    return int(config.get("grid_points", DEFAULT_GRID_POINTS))


def _run_fiducial(config: dict, base: Path, seed: int) -> dict:
    data = _parse_data(config, base)
    density = fiducial_density(
        normal_mean_pivot(),
        data,
        config.get("prior_knowledge", "none_or_very_little"),
        grid_points=_grid_points(config),
    )
    result = {"data": data.as_dict(), "density": _density_summary(density)}
    if "region" in config:
        region = _require_dict(config["region"], "'region'")
        if "threshold" not in region:
            raise InputError("'region' needs 'threshold'")
        side = region.get("side", "leq")
        result["region_probability"] = {
            "threshold": float(region["threshold"]),
            "side": side,
            "probability": fiducial_region_probability(
                density, region["threshold"], side
            ),
        }
    return result


def _run_bayes(config: dict, base: Path, seed: int) -> dict:
    data = _parse_data(config, base)
    prior = _parse_prior(config)
    if isinstance(prior, NormalPrior):
        posterior = conjugate_normal_update(prior, data)
        prior_summary = {"type": "normal", "mean": prior.mean, "variance": prior.variance}
    else:
        posterior = grid_bayes_update(prior, normal_mean_likelihood(), data)
        prior_summary = {
            "type": "grid",
            "lo": float(prior.lo),
            "hi": float(prior.hi),
            "grid_points": int(prior.weights.size),
        }
    return {
        "data": data.as_dict(),
        "prior": prior_summary,
        "density": _density_summary(posterior),
    }


def _run_bispatial(config: dict, base: Path, seed: int) -> dict:
    data = _parse_data(config, base)
    bconfig = _parse_bispatial(config)
    pvalue = one_sided_p_value(data, bconfig.epsilon, bconfig.p_value_threshold)
    probability = assess_region_probability(pvalue, bconfig)
    return {
        "data": data.as_dict(),
        "epsilon": bconfig.epsilon,
        "p0": pvalue.p0,
        "applicable": pvalue.applicable,
        "p_value_threshold": pvalue.threshold,
        "region_probability": probability,
        "complement_probability": 1.0 - probability,
    }


def _run_pipeline(config: dict, base: Path, seed: int) -> dict:
    data = _parse_data(config, base)
    bconfig = _parse_bispatial(config)
    pvalue = one_sided_p_value(data, bconfig.epsilon, bconfig.p_value_threshold)
    density = ioi_pipeline(
        data,
        bconfig,
        config.get("prior_knowledge", "none_or_very_little"),
        grid_points=_grid_points(config),
    )
    mass_leq = density.region_mass(-math.inf, bconfig.epsilon)
    return {
        "data": data.as_dict(),
        "epsilon": bconfig.epsilon,
        "p0": pvalue.p0,
        "region_probability": mass_leq,
        "region_masses": {"leq": mass_leq, "gt": density.region_mass(bconfig.epsilon, math.inf)},
        "density": _density_summary(density),
    }


def _write_draws_csv(path: Path, draws: np.ndarray) -> None:
    k = draws.shape[1]
    lines = ["theta_" + ",theta_".join(str(j + 1) for j in range(k))]
    for row in draws:
        lines.append(",".join(repr(float(v)) for v in row))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def _run_gibbs(config: dict, base: Path, seed: int) -> dict:
    conditionals = _parse_model(config)
    if "scan" not in config:
        raise InputError("gibbs mode needs a 'scan'")
    scan = _parse_scan(config["scan"])
    if "iterations" not in config:
        raise InputError("gibbs mode needs 'iterations'")
    init = config.get("init")
    if init is None:
        init = [0.0] * conditionals.k
    chain = gibbs_run(
        conditionals,
        scan,
        init,
        int(config["iterations"]),
        config.get("burn_in"),
        seed,
    )
    kept = chain.draws_post_burn_in
    result = {
        "k": conditionals.k,
        "method_tags": list(conditionals.method_tags),
        "iterations": chain.iterations,
        "burn_in": chain.burn_in,
        "scan": scan.as_dict(),
        "means": [float(v) for v in kept.mean(axis=0)],
        "covariance": [[float(v) for v in row] for row in np.cov(kept, rowvar=False)],
        "draws_recorded": int(kept.shape[0]),
    }
    if "draws_csv" in config:
        name = str(config["draws_csv"])
        _write_draws_csv(base / name, chain.draws)
        result["draws_csv"] = name
    if "check_compatibility" in config:
        block = _require_dict(config["check_compatibility"], "'check_compatibility'")
        box = block.get("box")
        if box is None:
            raise InputError("'check_compatibility' needs a 'box'")
        box = tuple((float(lo), float(hi)) for lo, hi in box)
        verdict = check_compatibility(
            conditionals, box, int(block.get("grid_points", 201))
        )
        result["compatibility"] = verdict.as_dict()
    return result


def _run_scan_sensitivity(config: dict, base: Path, seed: int) -> dict:
    conditionals = _parse_model(config)
    scans_payload = config.get("scans")
    if not isinstance(scans_payload, list) or len(scans_payload) < 2:
        raise InputError("scan-sensitivity needs a 'scans' list with at least two entries")
    scans = [_parse_scan(p) for p in scans_payload]
    if "iterations" not in config:
        raise InputError("scan-sensitivity mode needs 'iterations'")
    outcome = scan_sensitivity(
        conditionals,
        scans,
        int(config["iterations"]),
        config.get("burn_in"),
        seed,
        init=config.get("init"),
    )
    result = outcome.as_dict()
    result["per_scan_means"] = [
        [float(v) for v in chain.draws_post_burn_in.mean(axis=0)]
        for chain in outcome.chains
    ]
    return result


_RUNNERS = {
    "fiducial": _run_fiducial,
    "bayes": _run_bayes,
    "bispatial": _run_bispatial,
    "compose-pipeline": _run_pipeline,
    "gibbs": _run_gibbs,
    "scan-sensitivity": _run_scan_sensitivity,
}


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _emit_error(exc: Exception) -> int:
    record: dict = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ChainAborted):
        record["iteration"] = exc.iteration
        record["coordinate"] = exc.coordinate
        code = 4
    elif isinstance(exc, AnalogyRejected):
        code = 2
    elif isinstance(exc, InputError):
        code = 3
    elif isinstance(exc, InferenceError):
        code = 4
    else:  # pragma: no cover - mapping is exhaustive for InferenceError
        code = 4
    record["exit_code"] = code
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return code


def _cmd_run(config_path: Path, seed_override: int | None, out_override: str | None) -> int:
    config = _load_config(config_path)
    mode = config["mode"]
    seed = _effective_seed(config, seed_override, mode)
    base = config_path.resolve().parent
    if out_override is not None:
        out = Path(out_override)
    elif "out" in config:
        out = base / str(config["out"])
    else:
        out = config_path.with_name(config_path.stem + ".report.json")
    result = _RUNNERS[mode](config, base, seed)
    echo = copy.deepcopy(config)
    echo.pop("out", None)
    echo["seed"] = seed
    report = {
        "engine_version": __version__,
        "mode": mode,
        "seed": seed,
        "config": echo,
        "result": result,
    }
    _atomic_write_text(out, json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(json.dumps({"status": "ok", "mode": mode, "report": str(out)}, sort_keys=True))
    return 0


def _cmd_validate(config_path: Path) -> int:
    config = _load_config(config_path)
    mode = config["mode"]
    base = config_path.resolve().parent
    _effective_seed(config, None, mode)
    if mode not in STOCHASTIC_MODES:
        _parse_data(config, base)
    if mode == "bayes":
        _parse_prior(config)
    if mode in ("bispatial", "compose-pipeline"):
        _parse_bispatial(config)
    if mode in STOCHASTIC_MODES:
        _parse_model(config)
        if mode == "gibbs":
            if "scan" in config:
                _parse_scan(config["scan"])
            else:
                raise InputError("gibbs mode needs a 'scan'")
            if "iterations" not in config:
                raise InputError("gibbs mode needs 'iterations'")
        else:
            scans = config.get("scans")
            if not isinstance(scans, list) or len(scans) < 2:
                raise InputError(
                    "scan-sensitivity needs a 'scans' list with at least two entries"
                )
            for payload in scans:
                _parse_scan(payload)
            if "iterations" not in config:
                raise InputError("scan-sensitivity mode needs 'iterations'")
    print(json.dumps({"status": "valid", "mode": mode}, sort_keys=True))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ioi",
        description="Batch statistical-inference runner: JSON configs to JSON/CSV reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_parser = sub.add_parser("run", help="run an analysis config")
    run_parser.add_argument("config", type=Path, help="path to the JSON config")
    run_parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_parser.add_argument("--out", default=None, help="override the report path")
    validate_parser = sub.add_parser("validate", help="check a config without running it")
    validate_parser.add_argument("config", type=Path, help="path to the JSON config")
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args.config, args.seed, args.out)
        return _cmd_validate(args.config)
    except InferenceError as exc:
        return _emit_error(exc)


def run_main() -> None:
    raise SystemExit(main())

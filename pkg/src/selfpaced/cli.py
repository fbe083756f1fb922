"""Command-line harness.

Commands:
  derive      build a regularizer from a weight curve or a penalty, dump its
              penalty/weight/latent tables as CSV, and validate it
  validate    run the validation checks on a catalog or derived regularizer
  curriculum  dump a 2-D lattice of unconstrained vs curriculum-constrained
              latent values
  fit         run self-paced training on a CSV dataset
  compare     seeded robustness comparison of self-paced fits vs ridge

Global flags: --config <json> (defaults), --out <dir>, --seed <int>.
Command-line flags override config-file values; every output JSON echoes
the effective configuration.  Exit codes: 0 success, 1 input/IO error,
2 mathematical validation failure, 3 iteration-cap exit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .conjugacy import SampledFunction
from .curriculum import (
    CurriculumRegion,
    affine_action,
    critical_region_side,
    group_latent,
    homogeneous_action_ray,
    homogeneous_closed_form,
)
from .errors import BadParam, SelfPacedError, SingularRegion
from .experiments import SuiteConfig, run_compare, write_compare_csv
from .regularizers import (
    design_from_regularizer,
    design_from_weight,
    get_regularizer,
    tabulate,
    validate_sp_regularizer,
)
from .training import (
    TrainConfig,
    latent_descent_fit,
    load_dataset_csv,
    spl_fit,
)


class _InputError(Exception):
    """Bad flags, config, or input files; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep 2 for math failures
        raise _InputError(message)


# ==== named input functions for the design pipelines ==========================

WEIGHT_INPUTS = {
    "linear-clamp": lambda l: np.clip(1.0 - np.asarray(l, dtype=float), 0.0, 1.0),
    "exp-decay": lambda l: np.exp(-np.asarray(l, dtype=float)),
    "inverse": lambda l: np.minimum(
        1.0, 1.0 / np.maximum(np.asarray(l, dtype=float), 1e-300)
    ),
    "step": lambda l: np.where(np.asarray(l, dtype=float) < 1.0, 1.0, 0.0),
}

PENALTY_INPUTS = {
    "neg-log": lambda v: np.where(
        np.asarray(v, dtype=float) <= 0,
        np.inf,
        -np.log(np.maximum(np.asarray(v, dtype=float), 1e-300)),
    ),
    "half-quadratic": lambda v: 0.5 * (1.0 - np.asarray(v, dtype=float)) ** 2,
    "neg-linear": lambda v: -np.asarray(v, dtype=float),
    "entropy": lambda v: np.where(
        np.asarray(v, dtype=float) > 0,
        np.asarray(v, dtype=float) * np.log(np.maximum(np.asarray(v, dtype=float), 1e-300))
        - np.asarray(v, dtype=float)
        + 1.0,
        1.0,
    ),
}


def _input_callable(pipeline: str, name: str):
    registry = WEIGHT_INPUTS if pipeline == "from-weight" else PENALTY_INPUTS
    if name in registry:
        return registry[name]
    if name.endswith(".csv"):
        if not os.path.exists(name):
            raise _InputError(f"input file not found: {name}")
        try:
            sf = SampledFunction.from_csv(name)
        except ValueError as exc:
            raise _InputError(str(exc)) from None
        grid, vals = sf.grid, sf.values
        if pipeline == "from-weight":
            return lambda l: np.interp(np.asarray(l, dtype=float), grid, vals)
        lo, hi = float(grid[0]), float(grid[-1])
        return lambda v: np.where(
            (np.asarray(v, dtype=float) < lo) | (np.asarray(v, dtype=float) > hi),
            np.inf,
            np.interp(np.asarray(v, dtype=float), grid, vals),
        )
    raise _InputError(
        f"unknown input {name!r}: expected one of {sorted(registry)} or a .csv path"
    )


# ==== config plumbing =========================================================


def _load_config_file(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise _InputError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise _InputError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise _InputError(f"{path}: config must be a JSON object")
    return data


def _merge_config(defaults: dict, file_cfg: dict, flag_values: dict, where: str) -> dict:
    unknown = set(file_cfg) - set(defaults)
    if unknown:
        raise _InputError(f"{where}: unknown config keys: {sorted(unknown)}")
    merged = dict(defaults)
    merged.update(file_cfg)
    for key, val in flag_values.items():
        if val is not None:
            merged[key] = val
    return merged


def _write_json(path, payload: dict):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_table_csv(path, xs, vals):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x,value\n")
        for x, v in zip(xs, vals):
            fh.write(f"{float(x)!r},{float(v)!r}\n")


def _parse_floats(text: str, flag: str) -> tuple:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError:
        raise _InputError(f"{flag}: expected comma-separated numbers, got {text!r}") from None


def _parse_partition(text: str) -> list:
    try:
        return [
            [int(tok) for tok in block.split(",") if tok.strip() != ""]
            for block in text.split(";")
        ]
    except ValueError:
        raise _InputError(f"--groups: expected blocks like '0,1;2', got {text!r}") from None


def _region_from(merged: dict) -> CurriculumRegion:
    spec = merged.get("region")
    if spec is None or (isinstance(spec, dict) and spec.get("kind") == "none"):
        return CurriculumRegion("none")
    if isinstance(spec, CurriculumRegion):
        return spec
    return CurriculumRegion.from_dict(spec)


def _region_flags_to_spec(args) -> dict | None:
    if getattr(args, "k", None) is not None:
        return {
            "kind": "halfspace",
            "k": list(_parse_floats(args.k, "--k")),
            "b": args.b if args.b is not None else 0.0,
        }
    if getattr(args, "groups", None) is not None:
        return {"kind": "groups", "partition": _parse_partition(args.groups)}
    return None


def _ensure_out(out_dir: str) -> str:
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise _InputError(f"cannot create output directory: {exc}") from None
    return out_dir


# ==== commands ================================================================


def _build_regularizer(merged: dict):
    """Resolve a regularizer from 'regularizer' or a pipeline spec."""
    pipeline = merged.get("pipeline")
    if pipeline is None:
        name = merged.get("regularizer") or "hard"
        try:
            return get_regularizer(name)
        except BadParam as exc:  # a bad name is an input problem, not a math one
            raise _InputError(str(exc)) from None
    if pipeline not in ("from-weight", "from-regularizer"):
        raise _InputError(f"unknown pipeline {pipeline!r}")
    source = merged.get("input")
    if not source:
        raise _InputError("pipeline requires --input (a named function or .csv path)")
    fn = _input_callable(pipeline, source)
    if pipeline == "from-weight":
        return design_from_weight(fn, l_max=merged["l_max"], n=merged["grid_points"])
    return design_from_regularizer(fn, n=merged["grid_points"])


_DERIVE_DEFAULTS = {
    "pipeline": "from-weight",
    "input": None,
    "lam": 1.0,
    "grid_points": 2049,
    "l_max": 8.0,
    "span": 8.0,
    "table_points": 513,
}


def cmd_derive(args) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}
    merged = _merge_config(
        _DERIVE_DEFAULTS,
        file_cfg,
        {
            "pipeline": args.pipeline,
            "input": args.input,
            "lam": args.lam,
            "grid_points": args.grid_points,
            "l_max": args.l_max,
        },
        "derive",
    )
    if merged["lam"] is None or merged["lam"] <= 0:
        raise _InputError("--lambda must be positive")
    out = _ensure_out(args.out)

    try:
        reg = _build_regularizer(merged)
        report = validate_sp_regularizer(reg)
        tables = tabulate(
            reg, lam=merged["lam"], n=merged["table_points"], span=merged["span"]
        )
    except SelfPacedError as exc:
        print(f"derivation failed: {exc}", file=sys.stderr)
        return 2

    for key, fname in (("penalty", "penalty.csv"), ("weight", "weight.csv"), ("latent", "latent.csv")):
        xs, vals = tables[key]
        _write_table_csv(os.path.join(out, fname), xs, vals)
    _write_json(
        os.path.join(out, "validation.json"),
        {"config": merged, "regularizer": reg.name, "report": report.to_dict()},
    )
    if not report.verdict:
        failed = ", ".join(c.name for c in report.failures())
        print(f"validation failed: {failed}", file=sys.stderr)
        return 2
    print(f"derived {reg.name}: all checks passed; tables in {out}")
    return 0


_VALIDATE_DEFAULTS = {
    "regularizer": None,
    "pipeline": None,
    "input": None,
    "grid_points": 2049,
    "l_max": 8.0,
}


def cmd_validate(args) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}
    merged = _merge_config(
        _VALIDATE_DEFAULTS,
        file_cfg,
        {
            "regularizer": args.regularizer,
            "pipeline": args.pipeline,
            "input": args.input,
            "grid_points": args.grid_points,
        },
        "validate",
    )
    if merged["regularizer"] is None and merged["pipeline"] is None:
        raise _InputError("validate needs --regularizer or --pipeline/--input")
    out = _ensure_out(args.out)

    try:
        reg = _build_regularizer(merged)
        report = validate_sp_regularizer(reg)
    except SelfPacedError as exc:
        print(f"validation errored: {exc}", file=sys.stderr)
        return 2

    _write_json(
        os.path.join(out, "validation.json"),
        {"config": merged, "regularizer": reg.name, "report": report.to_dict()},
    )
    if not report.verdict:
        failed = ", ".join(c.name for c in report.failures())
        print(f"validation failed: {failed}", file=sys.stderr)
        return 2
    print(f"{reg.name}: all checks passed")
    return 0


_CURRICULUM_DEFAULTS = {
    "regularizer": "exp",
    "lam": 1.0,
    "region": None,
    "grid": 21,
    "span": 4.0,
}


def cmd_curriculum(args) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}
    merged = _merge_config(
        _CURRICULUM_DEFAULTS,
        file_cfg,
        {
            "regularizer": args.regularizer,
            "lam": args.lam,
            "region": _region_flags_to_spec(args),
            "grid": args.grid,
            "span": args.span,
        },
        "curriculum",
    )
    if merged["lam"] is None or merged["lam"] <= 0:
        raise _InputError("--lambda must be positive")
    if merged["grid"] < 2:
        raise _InputError("--grid must be at least 2")
    out = _ensure_out(args.out)
    lam = float(merged["lam"])

    try:
        reg = get_regularizer(merged["regularizer"])
    except BadParam as exc:
        raise _InputError(str(exc)) from None
    try:
        region = _region_from(merged)
        if region.kind == "intersection":
            raise _InputError("curriculum lattice supports halfspace/groups/none regions")
        if region.kind == "groups":
            from .curriculum import check_partition

            check_partition(region.partition, 2)
    except SelfPacedError as exc:
        print(f"curriculum setup failed: {exc}", file=sys.stderr)
        return 2

    axis = np.linspace(0.0, float(merged["span"]), int(merged["grid"]))
    halfspace = region.halfspaces[0] if region.kind == "halfspace" else None
    is_exp_pair = (
        halfspace is not None
        and halfspace.b == 0.0
        and reg.name == "exp"
        and np.count_nonzero(halfspace.k) == 2
    )

    rows = []
    sides = {"unaffected": 0, "penalized": 0}
    boundary = []
    max_excess = 0.0
    try:
        for l1 in axis:
            for l2 in axis:
                l = np.array([l1, l2])
                base = float(np.sum(reg.latent(lam, l)))
                if region.kind == "none":
                    fnew, side = base, "-"
                elif region.kind == "groups":
                    fnew = group_latent(reg, lam, l, region.partition).value
                    side = "-"
                else:
                    side = critical_region_side(reg, lam, l, halfspace)
                    if halfspace.b == 0.0:
                        if is_exp_pair:
                            fnew = homogeneous_closed_form(reg, lam, l, halfspace).value
                        else:
                            fnew = homogeneous_action_ray(reg, lam, l, halfspace).value
                    else:
                        fnew = affine_action(reg, lam, l, halfspace).value
                    sides[side] += 1
                    w = np.asarray(reg.weight(lam, l), dtype=float)
                    if abs(float(w @ halfspace.k) - halfspace.b) <= 1e-9:
                        boundary.append([float(l1), float(l2)])
                max_excess = max(max_excess, fnew - base)
                rows.append((float(l1), float(l2), base, float(fnew), side))
    except SingularRegion as exc:
        print(f"singular region: {exc}", file=sys.stderr)
        return 2
    except SelfPacedError as exc:
        print(f"curriculum evaluation failed: {exc}", file=sys.stderr)
        return 2

    lattice_path = os.path.join(out, "lattice.csv")
    with open(lattice_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("l1,l2,F,Fnew,side\n")
        for l1, l2, base, fnew, side in rows:
            fh.write(f"{l1!r},{l2!r},{base!r},{fnew!r},{side}\n")
    merged_echo = dict(merged)
    merged_echo["region"] = region.to_dict()
    _write_json(
        os.path.join(out, "summary.json"),
        {
            "config": merged_echo,
            "max_excess": float(max_excess),
            "sides": sides,
            "boundary_count": len(boundary),
            "boundary_points": boundary[:10],
        },
    )
    print(f"lattice written to {lattice_path} ({len(rows)} points)")
    return 0


_FIT_DEFAULTS = {
    "dataset": None,
    "regularizer": "hard",
    "schedule": "median",
    "lam": None,
    "fractions": (),
    "growth": 1.3,
    "stages": 16,
    "ridge": 1e-3,
    "loss": "squared",
    "region": None,
    "max_inner": 200,
    "inner_tol": 1e-9,
    "grad_tol": 1e-7,
    "full_weight_threshold": 0.99,
    "seed": 0,
    "cross_check": False,
}


def cmd_fit(args) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}
    flags = {
        "dataset": args.dataset,
        "regularizer": args.regularizer,
        "schedule": args.schedule,
        "lam": args.lam,
        "fractions": _parse_floats(args.fractions, "--fractions") if args.fractions else None,
        "growth": args.growth,
        "stages": args.stages,
        "ridge": args.ridge,
        "loss": args.loss,
        "region": _region_flags_to_spec(args),
        "max_inner": args.max_inner,
        "seed": args.seed,
        "cross_check": True if args.cross_check else None,
    }
    merged = _merge_config(_FIT_DEFAULTS, file_cfg, flags, "fit")
    if not merged["dataset"]:
        raise _InputError("fit requires --dataset <csv>")
    out = _ensure_out(args.out)

    try:
        dataset = load_dataset_csv(merged["dataset"])
    except OSError as exc:
        raise _InputError(f"cannot read dataset: {exc}") from None
    except ValueError as exc:
        raise _InputError(str(exc)) from None

    config_dict = {
        k: v
        for k, v in merged.items()
        if k in TrainConfig.__dataclass_fields__
    }
    if config_dict.get("region") is None:
        config_dict["region"] = {"kind": "none"}
    config_dict["fractions"] = tuple(config_dict.get("fractions") or ())
    try:
        config = TrainConfig.from_dict(config_dict)
        get_regularizer(config.regularizer)
    except SelfPacedError as exc:
        raise _InputError(f"bad training config: {exc}") from None

    try:
        state = spl_fit(dataset, config)
        payload = {"config": {**config.to_dict(), "dataset": merged["dataset"]}}
        payload.update(state.to_dict())
        if merged["cross_check"]:
            reg = get_regularizer(config.regularizer)
            ld = latent_descent_fit(dataset, config, lam=state.lam, w0=state.w)
            payload["cross_check"] = {
                "grad_norm_at_fixed_point": state.grad_norm,
                "latent_descent_grad_norm": ld.grad_norm,
                "w_gap": float(np.linalg.norm(state.w - ld.w)),
            }
    except SelfPacedError as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return 2

    _write_json(os.path.join(out, "result.json"), payload)
    state.write_trace_csv(os.path.join(out, "trace.csv"))
    print(
        f"fit finished: lambda={state.lam:.6g}, {len(state.iters)} iterations, "
        f"converged={state.converged}"
    )
    return 0 if state.converged else 3


_COMPARE_DEFAULTS = {
    "n": 100,
    "d": 5,
    "noise": 0.1,
    "outlier_fraction": 0.2,
    "outlier_scale": 50.0,
    "seeds": 10,
    "ridge": 1e-3,
    "stages": 16,
    "growth": 1.3,
    "regularizers": ("hard", "exp"),
}


def cmd_compare(args) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}
    flags = {
        "n": args.n,
        "d": args.d,
        "noise": args.noise,
        "outlier_fraction": args.outlier_fraction,
        "outlier_scale": args.outlier_scale,
        "seeds": args.seeds,
        "stages": args.stages,
        "growth": args.growth,
        "ridge": args.ridge,
        "regularizers": (
            tuple(args.regularizers.split(",")) if args.regularizers else None
        ),
    }
    merged = _merge_config(_COMPARE_DEFAULTS, file_cfg, flags, "compare")
    seeds = merged["seeds"]
    if isinstance(seeds, str):
        # A bare integer is a seed count; only a comma-separated string
        # names explicit seeds.
        parsed = _parse_floats(seeds, "--seeds")
        if not parsed:
            raise _InputError("--seeds: expected a count or a list of seeds")
        seeds = tuple(int(s) for s in parsed) if "," in seeds else int(parsed[0])
    if isinstance(seeds, int):
        seeds = tuple(range(seeds))
    else:
        seeds = tuple(int(s) for s in seeds)
    out = _ensure_out(args.out)

    try:
        suite = SuiteConfig(
            n=int(merged["n"]),
            d=int(merged["d"]),
            noise=float(merged["noise"]),
            outlier_fraction=float(merged["outlier_fraction"]),
            outlier_scale=float(merged["outlier_scale"]),
            seeds=seeds,
            ridge=float(merged["ridge"]),
            stages=int(merged["stages"]),
            growth=float(merged["growth"]),
            regularizers=tuple(merged["regularizers"]),
        )
    except SelfPacedError as exc:
        raise _InputError(f"bad compare parameters: {exc}") from None

    try:
        result = run_compare(suite)
    except SelfPacedError as exc:
        print(f"comparison failed: {exc}", file=sys.stderr)
        return 2

    write_compare_csv(result, os.path.join(out, "compare.csv"))
    echo = dict(merged)
    echo["seeds"] = list(seeds)
    echo["regularizers"] = list(suite.regularizers)
    _write_json(
        os.path.join(out, "summary.json"),
        {"config": echo, **result["summary"]},
    )
    wins = result["summary"]["wins"]
    print(f"compare finished over {len(seeds)} seeds: wins vs ridge {wins}")
    return 0


# ==== parser ==================================================================


def build_parser() -> _Parser:
    p = _Parser(prog="selfpaced", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file with defaults")
        sp.add_argument("--out", default=".", help="output directory (default: .)")
        sp.add_argument("--seed", type=int, default=None, help="random seed")

    d = sub.add_parser("derive", help="build + validate a regularizer from a curve")
    common(d)
    d.add_argument("--pipeline", choices=("from-weight", "from-regularizer"))
    d.add_argument("--input", help="named function or .csv of samples")
    d.add_argument("--lambda", dest="lam", type=float, help="age for the table dumps")
    d.add_argument("--grid-points", dest="grid_points", type=int)
    d.add_argument("--l-max", dest="l_max", type=float)
    d.set_defaults(func=cmd_derive)

    v = sub.add_parser("validate", help="validate a catalog or derived regularizer")
    common(v)
    v.add_argument("--regularizer", help="catalog name: hard/linear/log/exp")
    v.add_argument("--pipeline", choices=("from-weight", "from-regularizer"))
    v.add_argument("--input")
    v.add_argument("--grid-points", dest="grid_points", type=int)
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("curriculum", help="dump constrained-latent lattice over 2-D losses")
    common(c)
    c.add_argument("--regularizer")
    c.add_argument("--lambda", dest="lam", type=float)
    c.add_argument("--k", help="halfspace normal, comma-separated (e.g. '1,-1')")
    c.add_argument("--b", type=float, help="halfspace offset (default 0)")
    c.add_argument("--groups", help="partition blocks like '0,1' or '0;1'")
    c.add_argument("--grid", type=int, help="lattice points per axis")
    c.add_argument("--span", type=float, help="losses range over [0, span]")
    c.set_defaults(func=cmd_curriculum)

    f = sub.add_parser("fit", help="self-paced training on a CSV dataset")
    common(f)
    f.add_argument("--dataset", help="CSV with feature columns then target")
    f.add_argument("--regularizer")
    f.add_argument("--schedule", choices=("median", "portion", "fixed"))
    f.add_argument("--lambda", dest="lam", type=float)
    f.add_argument("--fractions", help="comma-separated portions, e.g. '0.3,0.6,1.0'")
    f.add_argument("--growth", type=float)
    f.add_argument("--stages", type=int)
    f.add_argument("--ridge", type=float)
    f.add_argument("--loss", choices=("squared", "logistic"))
    f.add_argument("--k", help="curriculum halfspace normal")
    f.add_argument("--b", type=float, help="curriculum halfspace offset")
    f.add_argument("--groups", help="curriculum partition blocks like '0,1;2'")
    f.add_argument("--max-inner", dest="max_inner", type=int)
    f.add_argument("--cross-check", action="store_true", help="also run latent descent")
    f.set_defaults(func=cmd_fit)

    m = sub.add_parser("compare", help="robustness comparison vs unweighted ridge")
    common(m)
    m.add_argument("--n", type=int)
    m.add_argument("--d", type=int)
    m.add_argument("--noise", type=float)
    m.add_argument("--outlier-fraction", dest="outlier_fraction", type=float)
    m.add_argument("--outlier-scale", dest="outlier_scale", type=float)
    m.add_argument("--seeds", help="seed count (int) or comma-separated list")
    m.add_argument("--stages", type=int)
    m.add_argument("--growth", type=float)
    m.add_argument("--ridge", type=float)
    m.add_argument("--regularizers", help="comma-separated catalog names")
    m.set_defaults(func=cmd_compare)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

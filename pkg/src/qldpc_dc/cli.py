"""Command-line entry point.

Subcommands: ``code`` (build and export code matrices), ``dem`` (build
detector models), ``decode`` (decode a syndrome file), ``simulate`` and
``sweep`` (Monte Carlo failure-rate estimation).  Flags override values
from an optional JSON config file; every output is accompanied by a run
manifest recording the merged configuration.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, noise, sim
from .codes import (
    BbParams,
    bb_params,
    build_bb,
    build_rotated_surface,
    known_distance,
    parse_monomials,
)
from .detmodel import (
    build_bb_circuit_model,
    build_pheno_model,
    find_low_weight_trivial,
)
from .gf2 import BitVec, TripletFormatError, load_triplet, save_triplet
from .postproc import (
    DcConfig,
    MaskingMode,
    SecondRunPriors,
    bp_dc_decode,
    bp_dc_osd_decode,
    bp_osd_decode,
)
from .bp import bp_decode
from .sim import DECODERS, ExperimentConfig


class CliError(Exception):
    pass


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _manifest_scale(config: dict):
    if "min_sum_scale" in config:
        return config["min_sum_scale"]
    points = config.get("points") or []
    scales = sorted({p.get("min_sum_scale", 0.625) for p in points})
    if len(scales) == 1:
        return scales[0]
    return scales or 0.625


def write_manifest(path: Path, config: dict, started: str, extra: dict | None = None) -> None:
    manifest = {
        "config": config,
        "tool_version": __version__,
        "rng_algorithm": noise.RNG_ALGORITHM,
        "min_sum_scale": _manifest_scale(config),
        "started": started,
        "finished": _now(),
    }
    if extra:
        manifest.update(extra)
    with open(str(path) + ".manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise CliError(f"{path}: config file must hold a JSON object")
    return data


def _merged(args: argparse.Namespace, keys: list[str]) -> dict:
    """Flags beat config-file values; config-file values beat defaults."""
    file_cfg = _load_config_file(getattr(args, "config", None))
    merged = {}
    for key in keys:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            merged[key] = flag_val
        elif key in file_cfg:
            merged[key] = file_cfg[key]
    return merged


def _default_seed() -> int:
    env = os.environ.get("QLDPC_DC_SEED")
    return int(env) if env else 0


def _write_bits(path: Path, v: BitVec) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for i in range(v.length):
            f.write(f"{v[i]}\n")


def _read_bits(path: str) -> BitVec:
    with open(path, "r", encoding="utf-8") as f:
        tokens = f.read().split()
    try:
        bits = [int(t) for t in tokens]
    except ValueError as exc:
        raise CliError(f"{path}: syndrome entries must be 0 or 1") from exc
    if any(b not in (0, 1) for b in bits):
        raise CliError(f"{path}: syndrome entries must be 0 or 1")
    return BitVec.from_support(len(bits), [i for i, b in enumerate(bits) if b])


def _write_priors(path: Path, priors: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for p in priors:
            f.write(f"{p:.17g}\n")


def _read_priors(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as f:
        return np.array([float(t) for t in f.read().split()])


def _bb_params_from_args(args) -> BbParams:
    params = bb_params(args.l, args.m)
    if args.a or args.b:
        params = BbParams(
            l=args.l,
            m=args.m,
            a_monomials=parse_monomials(args.a) if args.a else params.a_monomials,
            b_monomials=parse_monomials(args.b) if args.b else params.b_monomials,
        )
    return params


def cmd_code(args) -> int:
    started = _now()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.family == "surface":
        code = build_rotated_surface(args.d)
        config = {"family": "surface", "d": args.d}
    else:
        params = _bb_params_from_args(args)
        code = build_bb(params)
        config = {
            "family": "bb", "l": args.l, "m": args.m,
            "a": [f"{b}{e}" for b, e in params.a_monomials],
            "b": [f"{b}{e}" for b, e in params.b_monomials],
        }
    for name, mat in (("hx", code.hx), ("hz", code.hz), ("ox", code.ox), ("oz", code.oz)):
        save_triplet(mat, out / f"{code.label}_{name}.txt")
    meta = {"n": code.n, "k": code.k, "label": code.label}
    d = known_distance(params if args.family == "bb" else code)
    if d is not None:
        meta["cited_distance"] = d
    meta_path = out / f"{code.label}_meta.json"
    with open(meta_path, "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    write_manifest(meta_path, config, started)
    print(f"wrote {code.label} (n={code.n}, k={code.k}) to {out}")
    return 0


def _export_model(model, out: Path, stem: str, config: dict, started: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    save_triplet(model.check_matrix, out / f"{stem}_dcm.txt")
    save_triplet(model.observables, out / f"{stem}_obs.txt")
    _write_priors(out / f"{stem}_priors.txt", model.priors)
    if model.degeneracy_matrix is not None:
        save_triplet(model.degeneracy_matrix, out / f"{stem}_ddm.txt")
    write_manifest(out / f"{stem}_dcm.txt", config, started)
    print(
        f"wrote {stem}: {model.check_matrix.rows} detectors x "
        f"{model.check_matrix.cols} mechanisms to {out}"
    )


def cmd_dem(args) -> int:
    started = _now()
    out = Path(args.out) if getattr(args, "out", None) else None
    if args.model == "pheno":
        code_obj = sim.parse_code_spec(args.code)
        if isinstance(code_obj, BbParams):
            code_obj = build_bb(code_obj)
        model = build_pheno_model(code_obj, args.rounds, args.p)
        stem = f"pheno_{code_obj.label}_T{args.rounds}"
        config = {"model": "pheno", "code": args.code, "rounds": args.rounds, "p": args.p}
        _export_model(model, out, stem, config, started)
        return 0
    if args.model == "circuit-bb":
        params = _bb_params_from_args(args)
        model = build_bb_circuit_model(params, args.rounds, args.p)
        stem = f"circuit_bb_l{args.l}m{args.m}_T{args.rounds}"
        config = {"model": "circuit-bb", "l": args.l, "m": args.m,
                  "rounds": args.rounds, "p": args.p}
        _export_model(model, out, stem, config, started)
        return 0
    # check-trivial
    h = load_triplet(args.dcm)
    obs = load_triplet(args.obs)
    trivial = find_low_weight_trivial(h, obs, args.wmax)
    for v in trivial:
        print(" ".join(str(j) for j in v.support))
    print(f"found {len(trivial)} trivial errors of weight <= {args.wmax}", file=sys.stderr)
    return 0


def cmd_decode(args) -> int:
    started = _now()
    h = load_triplet(args.dcm)
    syndrome = _read_bits(args.syndrome)
    if syndrome.length != h.rows:
        raise CliError(
            f"dimension mismatch: syndrome has {syndrome.length} bits "
            f"but the check matrix has {h.rows} rows"
        )
    if args.priors:
        priors = _read_priors(args.priors)
    else:
        priors = np.full(h.cols, args.p)
    if priors.shape[0] != h.cols:
        raise CliError(
            f"dimension mismatch: {priors.shape[0]} priors "
            f"but the check matrix has {h.cols} columns"
        )
    max_iter = args.max_iter if args.max_iter else h.cols
    dc_cfg = DcConfig(
        second_run_priors=SecondRunPriors(args.dc_second_priors or "reset"),
        rng_seed=args.seed if args.seed is not None else _default_seed(),
        masking_mode=MaskingMode(args.dc_masking),
    )
    if args.decoder in ("bp-dc", "bp-dc-osd"):
        if not args.ddm:
            raise CliError(f"decoder {args.decoder} requires --ddm")
        if not args.dc_second_priors:
            raise CliError(f"decoder {args.decoder} requires --dc-second-priors")
        h_deg = load_triplet(args.ddm)
        fn = bp_dc_decode if args.decoder == "bp-dc" else bp_dc_osd_decode
        result = fn(
            h, h_deg, syndrome, priors, max_iter, dc_cfg,
            variant=args.bp_variant, min_sum_scale=args.min_sum_scale,
        )
        estimate = result.estimate
        status = result.status.value
    elif args.decoder == "bp-osd":
        result = bp_osd_decode(
            h, syndrome, priors, max_iter,
            variant=args.bp_variant, min_sum_scale=args.min_sum_scale,
        )
        estimate = result.estimate
        status = result.status.value
    else:
        out = bp_decode(
            h, syndrome, priors, max_iter,
            variant=args.bp_variant, min_sum_scale=args.min_sum_scale,
        )
        estimate = out.hard
        status = "converged" if out.converged else "failed"
    _write_bits(Path(args.out), estimate)
    write_manifest(
        Path(args.out),
        {k: getattr(args, k, None) for k in
         ("decoder", "bp_variant", "min_sum_scale", "max_iter", "dc_second_priors",
          "dc_masking", "seed", "p")},
        started,
        extra={"status": status},
    )
    print(f"{status}: estimate written to {args.out}")
    return 0


_SIM_KEYS = [
    "code", "noise", "p", "decoder", "trials", "seed", "rounds", "bp_variant",
    "min_sum_scale", "max_iter", "dc_second_priors", "dc_masking", "threads",
    "bb_a", "bb_b",
]


def _experiment_config(merged: dict) -> ExperimentConfig:
    merged.setdefault("seed", _default_seed())
    merged.setdefault("threads", 1)
    try:
        return ExperimentConfig(**merged)
    except (TypeError, ValueError) as exc:
        raise CliError(str(exc)) from exc


def _emit(records: list[dict], cfgs: list[ExperimentConfig], args, started: str) -> int:
    text = (
        sim.records_to_csv(records)
        if args.format == "csv"
        else sim.records_to_jsonl(records)
    )
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        write_manifest(out, {"points": [dataclasses.asdict(c) for c in cfgs]}, started)
        if args.emit_plot_data:
            by_decoder: dict[str, list[dict]] = {}
            for rec in records:
                by_decoder.setdefault(rec["decoder"], []).append(rec)
            for decoder, recs in sorted(by_decoder.items()):
                curve = out.with_name(f"{out.stem}_{decoder}.dat")
                with open(curve, "w", encoding="utf-8") as f:
                    f.write("# p failure_rate ci_low ci_high\n")
                    for rec in sorted(recs, key=lambda r: r["p"]):
                        f.write(
                            f"{rec['p']:.10g} {rec['rate']:.10g} "
                            f"{rec['ci_low']:.10g} {rec['ci_high']:.10g}\n"
                        )
        print(f"wrote {len(records)} rows to {out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_simulate(args) -> int:
    started = _now()
    cfg = _experiment_config(_merged(args, _SIM_KEYS))
    stats = sim.run_trials(cfg)
    return _emit([sim.stats_record(cfg, stats)], [cfg], args, started)


def cmd_sweep(args) -> int:
    started = _now()
    merged = _merged(args, [k for k in _SIM_KEYS if k not in ("p", "decoder")])
    rates = [float(t) for t in args.p.split(",")]
    decoders = [d.strip() for d in args.decoders.split(",")]
    records = []
    cfgs = []
    for decoder in decoders:
        for p in rates:
            cfg = _experiment_config(dict(merged, p=p, decoder=decoder))
            cfgs.append(cfg)
            records.append(sim.stats_record(cfg, sim.run_trials(cfg)))
    return _emit(records, cfgs, args, started)


def _add_sim_flags(p: argparse.ArgumentParser, with_p: bool = True) -> None:
    p.add_argument("--code", help="surface:<d> or bb:<l>,<m>")
    p.add_argument("--noise", choices=["code-capacity", "pheno", "circuit-bb"])
    if with_p:
        p.add_argument("--p", type=float, help="physical error rate")
    p.add_argument("--rounds", type=int, help="measurement rounds T (default: d)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="master seed (env QLDPC_DC_SEED as fallback)")
    p.add_argument("--threads", type=int, help="worker processes (default 1)")
    p.add_argument("--bp-variant", dest="bp_variant",
                   choices=["product-sum", "min-sum"])
    p.add_argument("--min-sum-scale", dest="min_sum_scale", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--dc-second-priors", dest="dc_second_priors",
                   choices=["posterior", "reset"])
    p.add_argument("--dc-masking", dest="dc_masking",
                   choices=["zero-priors", "delete-columns"])
    p.add_argument("--bb-a", dest="bb_a", help="BB A monomials, e.g. x3,y1,y2")
    p.add_argument("--bb-b", dest="bb_b", help="BB B monomials, e.g. y3,x1,x2")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    p.add_argument("--out", help="output file (stdout if omitted)")
    p.add_argument("--emit-plot-data", action="store_true",
                   help="also write per-decoder curve files next to --out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qldpc-dc",
        description="BP decoding of quantum LDPC codes with degeneracy cutting",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_code = sub.add_parser("code", help="construct a code and export its matrices")
    code_sub = p_code.add_subparsers(dest="family", required=True)
    p_surface = code_sub.add_parser("surface")
    p_surface.add_argument("--d", type=int, required=True)
    p_surface.add_argument("--out", default=".")
    p_surface.set_defaults(func=cmd_code)
    p_bb = code_sub.add_parser("bb")
    p_bb.add_argument("--l", type=int, required=True)
    p_bb.add_argument("--m", type=int, required=True)
    p_bb.add_argument("--a", help="A monomials, e.g. x3,y1,y2")
    p_bb.add_argument("--b", help="B monomials, e.g. y3,x1,x2")
    p_bb.add_argument("--out", default=".")
    p_bb.set_defaults(func=cmd_code)

    p_dem = sub.add_parser("dem", help="build detector error models")
    dem_sub = p_dem.add_subparsers(dest="model", required=True)
    p_pheno = dem_sub.add_parser("pheno")
    p_pheno.add_argument("--code", required=True, help="surface:<d> or bb:<l>,<m>")
    p_pheno.add_argument("--rounds", type=int, required=True)
    p_pheno.add_argument("--p", type=float, required=True)
    p_pheno.add_argument("--out", default=".")
    p_pheno.set_defaults(func=cmd_dem)
    p_cbb = dem_sub.add_parser("circuit-bb")
    p_cbb.add_argument("--l", type=int, required=True)
    p_cbb.add_argument("--m", type=int, required=True)
    p_cbb.add_argument("--a", help="A monomials")
    p_cbb.add_argument("--b", help="B monomials")
    p_cbb.add_argument("--rounds", type=int, required=True)
    p_cbb.add_argument("--p", type=float, required=True)
    p_cbb.add_argument("--out", default=".")
    p_cbb.set_defaults(func=cmd_dem)
    p_triv = dem_sub.add_parser("check-trivial")
    p_triv.add_argument("--dcm", required=True, help="detector check matrix file")
    p_triv.add_argument("--obs", required=True, help="observable matrix file")
    p_triv.add_argument("--wmax", type=int, default=3)
    p_triv.set_defaults(func=cmd_dem)

    p_dec = sub.add_parser("decode", help="decode one syndrome from files")
    p_dec.add_argument("--dcm", required=True)
    p_dec.add_argument("--ddm", help="degeneracy matrix (needed for dc decoders)")
    p_dec.add_argument("--syndrome", required=True)
    p_dec.add_argument("--priors", help="priors file, one probability per line")
    p_dec.add_argument("--p", type=float, default=0.01,
                       help="uniform prior when --priors is absent")
    p_dec.add_argument("--decoder", choices=list(DECODERS), default="bp")
    p_dec.add_argument("--bp-variant", dest="bp_variant",
                       choices=["product-sum", "min-sum"], default="product-sum")
    p_dec.add_argument("--min-sum-scale", dest="min_sum_scale", type=float, default=0.625)
    p_dec.add_argument("--max-iter", dest="max_iter", type=int)
    p_dec.add_argument("--dc-second-priors", dest="dc_second_priors",
                       choices=["posterior", "reset"])
    p_dec.add_argument("--dc-masking", dest="dc_masking",
                       choices=["zero-priors", "delete-columns"], default="zero-priors")
    p_dec.add_argument("--seed", type=int)
    p_dec.add_argument("--out", required=True)
    p_dec.set_defaults(func=cmd_decode)

    p_sim = sub.add_parser("simulate", help="estimate one failure-rate point")
    _add_sim_flags(p_sim)
    p_sim.add_argument("--decoder", choices=list(DECODERS))
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="failure rates over a list of p values")
    _add_sim_flags(p_sweep, with_p=False)
    p_sweep.add_argument("--p", required=True, help="comma-separated rates")
    p_sweep.add_argument("--decoders", default="bp,bp-dc",
                         help="comma-separated decoder list")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, TripletFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

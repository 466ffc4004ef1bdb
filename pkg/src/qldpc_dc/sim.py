"""Monte Carlo estimation of decoding-failure probability.

A trial fails either because the estimate misses the syndrome
(nonconvergence) or because the residual flips a logical observable.
Scoring is outcome-based: a nonconvergent decoder whose estimate happens
to satisfy the syndrome is still scored by the logical test.  Confidence
intervals are Wilson score intervals at 95%, which behave sensibly at
zero observed failures.
"""

from __future__ import annotations

import concurrent.futures
import enum
import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional

from . import noise
from .bp import PRODUCT_SUM, BpDecoder
from .codes import BbParams, bb_params, build_bb, build_rotated_surface, parse_monomials
from .detmodel import (
    DetectorModel,
    build_bb_circuit_model,
    build_pheno_model,
    code_capacity_model,
)
from .gf2 import BitVec, SparseBinMatrix, mat_vec_t
from .postproc import (
    DcConfig,
    DecodeResult,
    DecodeStatus,
    MaskingMode,
    SecondRunPriors,
    bp_dc_decode,
    bp_dc_osd_decode,
    bp_osd_decode,
)

DECODERS = ("bp", "bp-dc", "bp-osd", "bp-dc-osd")

CSV_HEADER = "code,noise,decoder,p,T,trials,fail_logical,fail_nonconv,rate,ci_low,ci_high,seed"


class Outcome(enum.Enum):
    SUCCESS = "success"
    LOGICAL_FAILURE = "logical-failure"
    NONCONVERGENT = "nonconvergent"


def check_success(
    error: BitVec, estimate: BitVec, checks: SparseBinMatrix, observables: SparseBinMatrix
) -> Outcome:
    """Outcome-based scoring of one decoded trial."""
    if mat_vec_t(estimate, checks) != mat_vec_t(error, checks):
        return Outcome.NONCONVERGENT
    residual = error ^ estimate
    if mat_vec_t(residual, observables).weight():
        return Outcome.LOGICAL_FAILURE
    return Outcome.SUCCESS


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return (0.0, 1.0)
    p = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    centre = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


def intervals_overlap(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return a[0] <= b[1] and b[0] <= a[1]


@dataclass(frozen=True)
class FailureStats:
    trials: int
    failures_logical: int
    failures_nonconvergent: int
    failure_rate: float
    ci_low: float
    ci_high: float

    @classmethod
    def from_counts(cls, trials: int, logical: int, nonconv: int) -> "FailureStats":
        fails = logical + nonconv
        lo, hi = wilson_interval(fails, trials)
        return cls(trials, logical, nonconv, fails / trials, lo, hi)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to bit-reproduce one failure-rate point."""

    code: str  # "surface:3" or "bb:6,6"
    noise: str  # "code-capacity" | "pheno" | "circuit-bb"
    p: float
    decoder: str
    trials: int
    seed: int
    rounds: Optional[int] = None  # defaults to d for pheno/circuit models
    bp_variant: str = PRODUCT_SUM
    min_sum_scale: float = 0.625
    max_iter: Optional[int] = None  # defaults: n (code capacity) or 1000
    dc_second_priors: Optional[str] = None  # "posterior" | "reset"
    dc_masking: str = MaskingMode.ZERO_PRIORS.value
    threads: int = 1
    bb_a: Optional[str] = None  # monomials like "x3,y1,y2"
    bb_b: Optional[str] = None

    def __post_init__(self):
        if not 0.0 < self.p < 0.5:
            raise ValueError("p must lie in (0, 0.5)")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.decoder not in DECODERS:
            raise ValueError(f"decoder must be one of {DECODERS}")
        if "dc" in self.decoder and self.dc_second_priors is None:
            raise ValueError("dc decoders require an explicit dc_second_priors choice")


def parse_code_spec(spec: str, bb_a: Optional[str] = None, bb_b: Optional[str] = None):
    """Parse "surface:<d>" or "bb:<l>,<m>" into a constructed code."""
    kind, _, rest = spec.partition(":")
    if kind == "surface":
        return build_rotated_surface(int(rest))
    if kind == "bb":
        l_s, _, m_s = rest.partition(",")
        params = bb_params(int(l_s), int(m_s))
        if bb_a or bb_b:
            params = BbParams(
                l=int(l_s),
                m=int(m_s),
                a_monomials=parse_monomials(bb_a) if bb_a else params.a_monomials,
                b_monomials=parse_monomials(bb_b) if bb_b else params.b_monomials,
            )
        return params
    raise ValueError(f"unknown code spec {spec!r} (expected surface:<d> or bb:<l>,<m>)")


def _code_distance_hint(cfg: ExperimentConfig) -> int:
    """Default measurement rounds: T = d where a distance is on record."""
    from qldpc_dc.codes import known_distance

    if cfg.code.startswith("surface:"):
        return int(cfg.code.split(":")[1])
    parsed = parse_code_spec(cfg.code, cfg.bb_a, cfg.bb_b)
    d = known_distance(parsed)
    return d if d is not None else 2


def build_model(cfg: ExperimentConfig) -> DetectorModel:
    parsed = parse_code_spec(cfg.code, cfg.bb_a, cfg.bb_b)
    rounds = cfg.rounds if cfg.rounds is not None else _code_distance_hint(cfg)
    if cfg.noise == "code-capacity":
        code = build_bb(parsed) if isinstance(parsed, BbParams) else parsed
        return code_capacity_model(code, cfg.p)
    if cfg.noise == "pheno":
        code = build_bb(parsed) if isinstance(parsed, BbParams) else parsed
        return build_pheno_model(code, rounds, cfg.p)
    if cfg.noise == "circuit-bb":
        if not isinstance(parsed, BbParams):
            raise ValueError("circuit-bb noise requires a bb:<l>,<m> code spec")
        return build_bb_circuit_model(parsed, rounds, cfg.p)
    raise ValueError(f"unknown noise model {cfg.noise!r}")


def default_max_iter(cfg: ExperimentConfig, model: DetectorModel) -> int:
    if cfg.max_iter is not None:
        return cfg.max_iter
    if cfg.noise == "code-capacity":
        return model.check_matrix.cols
    return 1000


def _decode_trial(
    model: DetectorModel,
    decoder_name: str,
    syndrome: BitVec,
    max_iter: int,
    cfg: ExperimentConfig,
    dc_cfg: DcConfig,
    bp_decoder: BpDecoder,
) -> DecodeResult:
    h = model.check_matrix
    priors = model.priors
    if decoder_name == "bp":
        out = bp_decoder.decode(syndrome, priors, max_iter)
        status = DecodeStatus.CONVERGED_FIRST_BP if out.converged else DecodeStatus.FAILED
        return DecodeResult(out.hard, status, frozenset(), (out.iterations_used,))
    if decoder_name == "bp-osd":
        return bp_osd_decode(
            h, syndrome, priors, max_iter,
            variant=cfg.bp_variant, min_sum_scale=cfg.min_sum_scale, decoder=bp_decoder,
        )
    if model.degeneracy_matrix is None:
        raise ValueError("dc decoders need a model with a degeneracy matrix")
    if decoder_name == "bp-dc":
        return bp_dc_decode(
            h, model.degeneracy_matrix, syndrome, priors, max_iter, dc_cfg,
            variant=cfg.bp_variant, min_sum_scale=cfg.min_sum_scale, decoder=bp_decoder,
        )
    return bp_dc_osd_decode(
        h, model.degeneracy_matrix, syndrome, priors, max_iter, dc_cfg,
        variant=cfg.bp_variant, min_sum_scale=cfg.min_sum_scale, decoder=bp_decoder,
    )


def _run_block(cfg: ExperimentConfig, lo: int, hi: int, model: Optional[DetectorModel] = None):
    if model is None:
        model = build_model(cfg)
    max_iter = default_max_iter(cfg, model)
    bp_decoder = BpDecoder(model.check_matrix, cfg.bp_variant, cfg.min_sum_scale)
    second = (
        SecondRunPriors(cfg.dc_second_priors)
        if cfg.dc_second_priors is not None
        else SecondRunPriors.RESET_TO_PRIOR
    )
    masking = MaskingMode(cfg.dc_masking)
    logical = 0
    nonconv = 0
    for t in range(lo, hi):
        rng = noise.trial_rng(cfg.seed, t)
        sample = noise.make_trial(model, rng)
        dc_cfg = DcConfig(
            second_run_priors=second,
            rng_seed=int(rng.integers(0, 2**63)),
            masking_mode=masking,
        )
        result = _decode_trial(
            model, cfg.decoder, sample.syndrome, max_iter, cfg, dc_cfg, bp_decoder
        )
        outcome = check_success(
            sample.error, result.estimate, model.check_matrix, model.observables
        )
        if outcome is Outcome.LOGICAL_FAILURE:
            logical += 1
        elif outcome is Outcome.NONCONVERGENT:
            nonconv += 1
    return logical, nonconv


def run_trials(cfg: ExperimentConfig, model: Optional[DetectorModel] = None) -> FailureStats:
    """Run cfg.trials seeded trials; a pure function of the config."""
    if model is None:
        model = build_model(cfg)
    if cfg.threads <= 1:
        logical, nonconv = _run_block(cfg, 0, cfg.trials, model)
        return FailureStats.from_counts(cfg.trials, logical, nonconv)
    chunk = max(1, -(-cfg.trials // (cfg.threads * 4)))
    blocks = [(lo, min(lo + chunk, cfg.trials)) for lo in range(0, cfg.trials, chunk)]
    logical = 0
    nonconv = 0
    with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.threads) as pool:
        futures = [pool.submit(_run_block, cfg, lo, hi) for lo, hi in blocks]
        for fut in futures:
            l, nc = fut.result()
            logical += l
            nonconv += nc
    return FailureStats.from_counts(cfg.trials, logical, nonconv)


def stats_record(cfg: ExperimentConfig, stats: FailureStats) -> dict:
    rounds = cfg.rounds if cfg.rounds is not None else (
        0 if cfg.noise == "code-capacity" else _code_distance_hint(cfg)
    )
    return {
        "code": cfg.code,
        "noise": cfg.noise,
        "decoder": cfg.decoder,
        "p": cfg.p,
        "T": rounds,
        "trials": stats.trials,
        "fail_logical": stats.failures_logical,
        "fail_nonconv": stats.failures_nonconvergent,
        "rate": stats.failure_rate,
        "ci_low": stats.ci_low,
        "ci_high": stats.ci_high,
        "seed": cfg.seed,
    }


def _format_value(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def records_to_csv(records: Iterable[dict]) -> str:
    lines = [CSV_HEADER]
    for rec in records:
        lines.append(",".join(_format_value(rec[k]) for k in CSV_HEADER.split(",")))
    return "\n".join(lines) + "\n"


def records_to_jsonl(records: Iterable[dict]) -> str:
    return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in records)

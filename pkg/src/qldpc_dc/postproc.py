"""Post-processing for BP: degeneracy cutting, OSD-0, and composed pipelines.

Degeneracy cutting removes, for every degeneracy row, the supported
variable with the lowest estimated error probability, then reruns BP once
on the modified graph.  Ties are broken uniformly at random from a seeded
generator; tie detection uses exact float equality, because symmetric
message flows produce exactly equal marginals on degenerate nodes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import gf2
from .bp import PRODUCT_SUM, BpDecoder
from .gf2 import BitVec, SparseBinMatrix


class InconsistentSystemError(RuntimeError):
    """OSD was asked to solve a syndrome outside the row space."""


class SecondRunPriors(enum.Enum):
    POSTERIOR = "posterior"
    RESET_TO_PRIOR = "reset"


class MaskingMode(enum.Enum):
    DELETE_COLUMNS = "delete-columns"
    ZERO_PRIORS = "zero-priors"


class DecodeStatus(enum.Enum):
    CONVERGED_FIRST_BP = "converged-first-bp"
    CONVERGED_AFTER_DC = "converged-after-dc"
    CONVERGED_AFTER_OSD = "converged-after-osd"
    FAILED = "failed"


@dataclass(frozen=True)
class DcConfig:
    second_run_priors: SecondRunPriors
    rng_seed: int = 0
    masking_mode: MaskingMode = MaskingMode.ZERO_PRIORS


@dataclass(frozen=True, eq=False)
class DecodeResult:
    estimate: BitVec
    status: DecodeStatus
    cut_indices: frozenset
    bp_iterations: tuple[int, ...]


def _dc_rng(seed: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, 0xDC], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def dc_cut_indices(h_deg: SparseBinMatrix, soft, rng: np.random.Generator) -> frozenset:
    """Lowest-probability variable per degeneracy row, ties drawn uniformly.

    Only soft values inside each row's support are read.
    """
    soft = np.asarray(soft, dtype=float)
    if soft.shape != (h_deg.cols,):
        raise ValueError(f"soft length {soft.shape} != degeneracy cols {h_deg.cols}")
    cuts = set()
    for i, support in enumerate(h_deg.row_supports):
        if not support:
            raise ValueError(f"degeneracy row {i} has empty support")
        best = None
        ties: list[int] = []
        for idx in support:
            v = soft[idx]
            if best is None or v < best:
                best = v
                ties = [idx]
            elif v == best:
                ties.append(idx)
        if len(ties) == 1:
            cuts.add(ties[0])
        else:
            cuts.add(ties[int(rng.integers(len(ties)))])
    return frozenset(cuts)


def _expand(values: np.ndarray, kept: np.ndarray, cols: int) -> np.ndarray:
    out = np.zeros(cols, dtype=values.dtype)
    out[kept] = values
    return out


def _run_dc(
    h: SparseBinMatrix,
    h_deg: SparseBinMatrix,
    syndrome: BitVec,
    priors,
    max_iter: int,
    variant: str,
    min_sum_scale: float,
    cfg: DcConfig,
    decoder: BpDecoder | None,
) -> tuple[DecodeResult, np.ndarray | None]:
    """Shared BP+DC pipeline; also returns the second run's full-width soft."""
    if h.cols != h_deg.cols:
        raise ValueError("check and degeneracy matrices disagree on column count")
    priors = np.asarray(priors, dtype=float)
    dec = decoder if decoder is not None else BpDecoder(h, variant, min_sum_scale)
    out1 = dec.decode(syndrome, priors, max_iter)
    if out1.converged:
        result = DecodeResult(
            out1.hard, DecodeStatus.CONVERGED_FIRST_BP, frozenset(),
            (out1.iterations_used,),
        )
        return result, None

    rng = _dc_rng(cfg.rng_seed)
    cuts = dc_cut_indices(h_deg, out1.soft, rng)
    base = priors if cfg.second_run_priors is SecondRunPriors.RESET_TO_PRIOR else out1.soft

    if cfg.masking_mode is MaskingMode.ZERO_PRIORS:
        p2 = np.array(base, dtype=float)
        p2[list(cuts)] = 0.0
        out2 = dec.decode(syndrome, p2, max_iter)
        estimate = out2.hard
        soft2 = out2.soft
    else:
        h2, kept = h.without_columns(cuts)
        out2 = BpDecoder(h2, variant, min_sum_scale).decode(
            syndrome, np.asarray(base, dtype=float)[kept], max_iter
        )
        estimate = BitVec.from_dense(_expand(out2.hard.to_dense(), kept, h.cols))
        soft2 = _expand(out2.soft, kept, h.cols)

    status = DecodeStatus.CONVERGED_AFTER_DC if out2.converged else DecodeStatus.FAILED
    result = DecodeResult(
        estimate, status, cuts, (out1.iterations_used, out2.iterations_used)
    )
    return result, soft2


def bp_dc_decode(
    h: SparseBinMatrix,
    h_deg: SparseBinMatrix,
    syndrome: BitVec,
    priors,
    max_iter: int,
    cfg: DcConfig,
    variant: str = PRODUCT_SUM,
    min_sum_scale: float = 0.625,
    decoder: BpDecoder | None = None,
) -> DecodeResult:
    """BP, then a single degeneracy cut and one BP rerun if BP failed."""
    result, _ = _run_dc(
        h, h_deg, syndrome, priors, max_iter, variant, min_sum_scale, cfg, decoder
    )
    return result


def osd0_decode(h: SparseBinMatrix, syndrome: BitVec, soft) -> BitVec:
    """Order-0 ordered statistics: pivot on most-probable-error columns first."""
    soft = np.asarray(soft, dtype=float)
    if soft.shape != (h.cols,):
        raise ValueError(f"soft length {soft.shape} != matrix cols {h.cols}")
    order = np.argsort(-soft, kind="stable")
    x = gf2.solve(h, syndrome, [int(c) for c in order])
    if x is None:
        raise InconsistentSystemError("syndrome not in the row space of H^T")
    return x


def bp_osd_decode(
    h: SparseBinMatrix,
    syndrome: BitVec,
    priors,
    max_iter: int,
    variant: str = PRODUCT_SUM,
    min_sum_scale: float = 0.625,
    decoder: BpDecoder | None = None,
) -> DecodeResult:
    """BP with OSD-0 fallback on the first run's soft output."""
    dec = decoder if decoder is not None else BpDecoder(h, variant, min_sum_scale)
    out = dec.decode(syndrome, np.asarray(priors, dtype=float), max_iter)
    if out.converged:
        return DecodeResult(
            out.hard, DecodeStatus.CONVERGED_FIRST_BP, frozenset(),
            (out.iterations_used,),
        )
    estimate = osd0_decode(h, syndrome, out.soft)
    return DecodeResult(
        estimate, DecodeStatus.CONVERGED_AFTER_OSD, frozenset(), (out.iterations_used,)
    )


def bp_dc_osd_decode(
    h: SparseBinMatrix,
    h_deg: SparseBinMatrix,
    syndrome: BitVec,
    priors,
    max_iter: int,
    cfg: DcConfig,
    variant: str = PRODUCT_SUM,
    min_sum_scale: float = 0.625,
    decoder: BpDecoder | None = None,
) -> DecodeResult:
    """BP+DC, then OSD-0 on the cut-reduced matrix if the second BP fails."""
    result, soft2 = _run_dc(
        h, h_deg, syndrome, priors, max_iter, variant, min_sum_scale, cfg, decoder
    )
    if result.status is not DecodeStatus.FAILED:
        return result
    h2, kept = h.without_columns(result.cut_indices)
    try:
        x = osd0_decode(h2, syndrome, np.asarray(soft2)[kept])
    except InconsistentSystemError:
        return result  # cuts removed every solution; an honest failure
    estimate = BitVec.from_dense(_expand(x.to_dense(), kept, h.cols))
    return DecodeResult(
        estimate, DecodeStatus.CONVERGED_AFTER_OSD, result.cut_indices,
        result.bp_iterations,
    )

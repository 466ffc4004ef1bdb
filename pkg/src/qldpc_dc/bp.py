"""Belief propagation on a Tanner graph with a flooding schedule.

Messages live in the log-likelihood-ratio domain, LLR = log((1-p)/p),
clamped to +/-35 so no update can produce a non-finite value.  Variables
whose prior is exactly 0 are absorbing: their edges are excluded from the
check updates (equivalent to deleting the column) and their soft output is
pinned to 0, which is what degeneracy-cutting relies on when it masks
nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf2 import BitVec, SparseBinMatrix

LLR_CLAMP = 35.0
_TOTAL_CLAMP = 350.0  # posterior LLR sums stay well inside exp() range

PRODUCT_SUM = "product-sum"
MIN_SUM = "min-sum"


class TannerGraph:
    """Edge-indexed view of a parity-check matrix.

    One edge per nonzero entry, stored check-major; a permutation gives the
    variable-major view.  Empty rows and empty columns take no part in
    message passing (an empty row with syndrome 1 simply never converges).
    """

    def __init__(self, h: SparseBinMatrix):
        self.h = h
        edge_var = []
        edge_chk = []
        for i, sup in enumerate(h.row_supports):
            for j in sup:
                edge_var.append(j)
                edge_chk.append(i)
        self.nnz = len(edge_var)
        self.edge_var = np.asarray(edge_var, dtype=np.intp)
        self.edge_chk = np.asarray(edge_chk, dtype=np.intp)

        # check-major segments (nonempty checks only)
        seg_starts = []
        seg_chk = []
        pos = 0
        for i, sup in enumerate(h.row_supports):
            if sup:
                seg_starts.append(pos)
                seg_chk.append(i)
                pos += len(sup)
        self.chk_seg_starts = np.asarray(seg_starts, dtype=np.intp)
        self.chk_seg_ids = np.asarray(seg_chk, dtype=np.intp)
        counts = np.array(
            [len(s) for s in h.row_supports if s], dtype=np.intp
        )
        self.edge_seg = np.repeat(np.arange(len(seg_chk), dtype=np.intp), counts)

        # variable-major permutation and segments (nonempty columns only)
        self.var_perm = np.argsort(self.edge_var, kind="stable")
        sorted_vars = self.edge_var[self.var_perm]
        vstarts = []
        vids = []
        if self.nnz:
            boundary = np.flatnonzero(
                np.concatenate(([True], sorted_vars[1:] != sorted_vars[:-1]))
            )
            vstarts = boundary
            vids = sorted_vars[boundary]
        self.var_seg_starts = np.asarray(vstarts, dtype=np.intp)
        self.var_seg_ids = np.asarray(vids, dtype=np.intp)


@dataclass
class BpOutput:
    """Soft marginals, the thresholded hard decision, and termination info."""

    soft: np.ndarray
    hard: BitVec
    converged: bool
    iterations_used: int


def hard_decision(soft) -> BitVec:
    """Threshold soft marginals at 0.5; ties are declared errors."""
    soft = np.asarray(soft, dtype=float)
    if soft.size and (soft.min() < 0.0 or soft.max() > 1.0):
        raise ValueError("soft values must lie in [0, 1]")
    return BitVec.from_dense(soft >= 0.5)


def _llr(priors: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        lam = np.log((1.0 - priors) / priors)
    return np.clip(lam, -LLR_CLAMP, LLR_CLAMP)


class BpDecoder:
    """Reusable decoder holding the graph and per-edge message buffers.

    One instance must not be shared mid-decode; distinct instances over
    the same immutable matrix can run concurrently.
    """

    def __init__(
        self,
        h: SparseBinMatrix,
        variant: str = PRODUCT_SUM,
        min_sum_scale: float = 0.625,
        graph: TannerGraph | None = None,
    ):
        if variant not in (PRODUCT_SUM, MIN_SUM):
            raise ValueError(f"unknown BP variant {variant!r}")
        self.h = h
        self.variant = variant
        self.min_sum_scale = float(min_sum_scale)
        self.graph = graph if graph is not None else TannerGraph(h)
        # edge-visit counters for cost instrumentation
        self.v2c_edge_updates = 0
        self.c2v_edge_updates = 0

    def decode(
        self,
        syndrome: BitVec,
        priors,
        max_iter: int,
        early_stop: bool = True,
    ) -> BpOutput:
        h, g = self.h, self.graph
        if syndrome.length != h.rows:
            raise ValueError(f"syndrome length {syndrome.length} != rows {h.rows}")
        priors = np.asarray(priors, dtype=float)
        if priors.shape != (h.cols,):
            raise ValueError(f"priors length {priors.shape} != cols {h.cols}")
        if priors.size and (priors.min() < 0.0 or priors.max() > 1.0):
            raise ValueError("priors must lie in [0, 1]")
        if max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        self.v2c_edge_updates = 0
        self.c2v_edge_updates = 0

        s_dense = syndrome.to_dense()
        active = priors > 0.0
        lam_prior = _llr(priors)
        edge_active = active[g.edge_var]
        syn_sign_e = 1.0 - 2.0 * s_dense[g.edge_chk]

        soft = priors.copy()
        soft[~active] = 0.0
        hard = soft >= 0.5
        if early_stop and self._syndrome_matches(hard, s_dense):
            return BpOutput(soft, BitVec.from_dense(hard), True, 0)

        m_vc = np.clip(lam_prior[g.edge_var], -LLR_CLAMP, LLR_CLAMP)
        self.v2c_edge_updates += g.nnz
        iterations = 0
        converged = False
        for it in range(1, max_iter + 1):
            iterations = it
            m_cv = self._check_update(m_vc, syn_sign_e, edge_active)
            self.c2v_edge_updates += g.nnz

            total = lam_prior.copy()
            if g.nnz:
                seg_sums = np.add.reduceat(m_cv[g.var_perm], g.var_seg_starts)
                total[g.var_seg_ids] += seg_sums
            total = np.clip(total, -_TOTAL_CLAMP, _TOTAL_CLAMP)
            soft = 1.0 / (1.0 + np.exp(total))
            soft[~active] = 0.0
            hard = soft >= 0.5
            if early_stop and self._syndrome_matches(hard, s_dense):
                converged = True
                break
            if it < max_iter:
                m_vc = np.clip(total[g.edge_var] - m_cv, -LLR_CLAMP, LLR_CLAMP)
                self.v2c_edge_updates += g.nnz
        if not early_stop:
            converged = self._syndrome_matches(hard, s_dense)
        return BpOutput(soft, BitVec.from_dense(hard), converged, iterations)

    def _syndrome_matches(self, hard: np.ndarray, s_dense: np.ndarray) -> bool:
        g = self.graph
        syn_hat = np.zeros(self.h.rows, dtype=np.int64)
        if g.nnz:
            bits = hard[g.edge_var].astype(np.int64)
            syn_hat[g.chk_seg_ids] = np.add.reduceat(bits, g.chk_seg_starts) & 1
        return bool(np.array_equal(syn_hat, s_dense.astype(np.int64)))

    def _check_update(self, m_vc, syn_sign_e, edge_active):
        if self.variant == PRODUCT_SUM:
            return self._check_update_product_sum(m_vc, syn_sign_e, edge_active)
        return self._check_update_min_sum(m_vc, syn_sign_e, edge_active)

    def _check_update_product_sum(self, m_vc, syn_sign_e, edge_active):
        g = self.graph
        t = np.tanh(0.5 * m_vc)
        t[~edge_active] = 1.0  # masked variables do not influence checks
        zero = t == 0.0
        tn = np.where(zero, 1.0, t)
        prod = np.multiply.reduceat(tn, g.chk_seg_starts)
        zcnt = np.add.reduceat(zero.astype(np.int64), g.chk_seg_starts)
        prod_e = prod[g.edge_seg]
        zcnt_e = zcnt[g.edge_seg]
        # extrinsic product: divide out own tanh unless zeros make it exact
        r = np.where(
            zcnt_e == 0,
            prod_e / tn,
            np.where(zero & (zcnt_e == 1), prod_e, 0.0),
        )
        r = np.clip(r * syn_sign_e, -1.0, 1.0)
        with np.errstate(divide="ignore"):
            m_cv = 2.0 * np.arctanh(r)
        m_cv = np.clip(m_cv, -LLR_CLAMP, LLR_CLAMP)
        m_cv[~edge_active] = 0.0
        return m_cv

    def _check_update_min_sum(self, m_vc, syn_sign_e, edge_active):
        g = self.graph
        mag = np.abs(m_vc)
        mag[~edge_active] = np.inf
        neg = (m_vc < 0) & edge_active
        min1 = np.minimum.reduceat(mag, g.chk_seg_starts)
        is_min = mag == min1[g.edge_seg]
        cmin = np.add.reduceat(is_min.astype(np.int64), g.chk_seg_starts)
        mag2 = np.where(is_min, np.inf, mag)
        min2 = np.minimum.reduceat(mag2, g.chk_seg_starts)
        min_excl = np.where(
            is_min & (cmin[g.edge_seg] == 1), min2[g.edge_seg], min1[g.edge_seg]
        )
        negc = np.add.reduceat(neg.astype(np.int64), g.chk_seg_starts)
        par = (negc[g.edge_seg] - neg.astype(np.int64)) & 1
        sign = np.where(par == 1, -1.0, 1.0)
        with np.errstate(invalid="ignore"):
            m_cv = syn_sign_e * sign * self.min_sum_scale * min_excl
        m_cv = np.clip(np.nan_to_num(m_cv, nan=0.0, posinf=LLR_CLAMP, neginf=-LLR_CLAMP),
                       -LLR_CLAMP, LLR_CLAMP)
        m_cv[~edge_active] = 0.0
        return m_cv


def bp_decode(
    h: SparseBinMatrix,
    syndrome: BitVec,
    priors,
    max_iter: int,
    variant: str = PRODUCT_SUM,
    min_sum_scale: float = 0.625,
    early_stop: bool = True,
) -> BpOutput:
    """One-shot decode; builds a throwaway decoder instance."""
    return BpDecoder(h, variant, min_sum_scale).decode(
        syndrome, priors, max_iter, early_stop=early_stop
    )

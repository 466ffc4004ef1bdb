"""Monte Carlo harness tests: scoring, determinism, output formats."""

import pytest

from qldpc_dc import sim
from qldpc_dc.codes import build_rotated_surface
from qldpc_dc.gf2 import BitVec, in_rowspace, mat_vec_t
from qldpc_dc.sim import (
    ExperimentConfig,
    Outcome,
    check_success,
    intervals_overlap,
    run_trials,
    wilson_interval,
)


class TestCheckSuccess:
    def setup_method(self):
        self.code = build_rotated_surface(3)

    def test_exact_match(self):
        e = BitVec.from_support(9, [1, 4])
        assert check_success(e, e, self.code.hz, self.code.oz) is Outcome.SUCCESS

    def test_stabilizer_offset_is_success(self):
        e = BitVec.from_support(9, [4])
        est = e ^ BitVec.from_support(9, self.code.hx.row(0))
        assert check_success(e, est, self.code.hz, self.code.oz) is Outcome.SUCCESS

    def test_logical_offset_fails(self):
        e = BitVec.from_support(9, [4])
        est = e ^ BitVec.from_support(9, self.code.ox.row(0))
        assert (
            check_success(e, est, self.code.hz, self.code.oz)
            is Outcome.LOGICAL_FAILURE
        )

    def test_syndrome_mismatch_is_nonconvergent(self):
        e = BitVec.from_support(9, [4])
        est = BitVec.from_support(9, [0])
        assert (
            check_success(e, est, self.code.hz, self.code.oz)
            is Outcome.NONCONVERGENT
        )

    def test_agrees_with_rowspace_on_all_small_cosets(self):
        # exhaustive cross-check on d=3: outcome-based scoring must agree
        # with the residual-in-rowspace(H_X) rule whenever syndromes match
        e = BitVec.from_support(9, [2, 3])
        s = mat_vec_t(e, self.code.hz)
        for bits in range(1 << 9):
            est = BitVec(9, bits)
            outcome = check_success(e, est, self.code.hz, self.code.oz)
            if mat_vec_t(est, self.code.hz) != s:
                assert outcome is Outcome.NONCONVERGENT
            elif in_rowspace(est ^ e, self.code.hx):
                assert outcome is Outcome.SUCCESS
            else:
                assert outcome is Outcome.LOGICAL_FAILURE


class TestWilson:
    def test_zero_counts(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == 0.0 and 0.0 < hi < 0.05

    def test_contains_point_estimate(self):
        lo, hi = wilson_interval(37, 200)
        assert lo <= 37 / 200 <= hi

    def test_overlap_helper(self):
        assert intervals_overlap((0.1, 0.2), (0.15, 0.3))
        assert not intervals_overlap((0.1, 0.2), (0.25, 0.3))


class TestRunTrials:
    def test_near_zero_rate_no_failures(self):
        cfg = ExperimentConfig(
            code="surface:3", noise="code-capacity", p=1e-9 + 1e-12,
            decoder="bp", trials=100, seed=0,
        )
        stats = run_trials(cfg)
        assert stats.failures_logical == 0 and stats.failures_nonconvergent == 0
        assert stats.ci_low == 0.0

    def test_failure_decomposition(self):
        cfg = ExperimentConfig(
            code="surface:3", noise="code-capacity", p=0.05,
            decoder="bp", trials=500, seed=1,
        )
        stats = run_trials(cfg)
        assert stats.failures_logical + stats.failures_nonconvergent <= stats.trials
        assert stats.failure_rate == pytest.approx(
            (stats.failures_logical + stats.failures_nonconvergent) / stats.trials
        )

    def test_bit_reproducible(self):
        cfg = ExperimentConfig(
            code="surface:3", noise="code-capacity", p=0.05,
            decoder="bp-dc", dc_second_priors="posterior", trials=400, seed=7,
        )
        assert run_trials(cfg) == run_trials(cfg)

    def test_threads_do_not_change_results(self):
        base = ExperimentConfig(
            code="surface:3", noise="code-capacity", p=0.05,
            decoder="bp-osd", trials=300, seed=3,
        )
        wide = ExperimentConfig(**{**base.__dict__, "threads": 3})
        assert run_trials(base) == run_trials(wide)

    def test_sanity_bound_below_physical_rate(self):
        cfg = ExperimentConfig(
            code="surface:3", noise="code-capacity", p=0.05,
            decoder="bp-osd", trials=2000, seed=5,
        )
        stats = run_trials(cfg)
        assert 0 < stats.failure_rate < 0.05

    def test_dc_requires_priors_choice(self):
        with pytest.raises(ValueError, match="dc_second_priors"):
            ExperimentConfig(
                code="surface:3", noise="code-capacity", p=0.05,
                decoder="bp-dc", trials=10, seed=0,
            )

    def test_rate_bounds_validated(self):
        with pytest.raises(ValueError):
            ExperimentConfig(
                code="surface:3", noise="code-capacity", p=0.6,
                decoder="bp", trials=10, seed=0,
            )

    def test_pheno_noise_pipeline(self):
        cfg = ExperimentConfig(
            code="surface:3", noise="pheno", p=0.01, rounds=3,
            decoder="bp-dc", dc_second_priors="posterior",
            trials=50, seed=2, max_iter=60,
        )
        stats = run_trials(cfg)
        assert stats.trials == 50

    def test_circuit_bb_noise_pipeline(self):
        cfg = ExperimentConfig(
            code="bb:6,6", noise="circuit-bb", p=0.002, rounds=2,
            decoder="bp-dc", dc_second_priors="reset", bp_variant="min-sum",
            min_sum_scale=1.0, trials=20, seed=2, max_iter=120,
        )
        stats = run_trials(cfg)
        assert stats.trials == 20


@pytest.mark.slow
def test_dominance_surface_d5():
    """Desk-scale ordering on the d=5 surface code-capacity point."""
    stats = {}
    for decoder, sp in [
        ("bp", None), ("bp-dc", "posterior"),
        ("bp-osd", None), ("bp-dc-osd", "posterior"),
    ]:
        cfg = ExperimentConfig(
            code="surface:5", noise="code-capacity", p=0.05, decoder=decoder,
            trials=10_000, seed=17, dc_second_priors=sp,
        )
        stats[decoder] = run_trials(cfg)
    assert stats["bp-dc"].failure_rate < stats["bp"].failure_rate
    assert not intervals_overlap(
        (stats["bp-dc"].ci_low, stats["bp-dc"].ci_high),
        (stats["bp"].ci_low, stats["bp"].ci_high),
    )
    assert stats["bp-osd"].failure_rate < stats["bp"].failure_rate
    assert intervals_overlap(
        (stats["bp-dc-osd"].ci_low, stats["bp-dc-osd"].ci_high),
        (stats["bp-osd"].ci_low, stats["bp-osd"].ci_high),
    )


@pytest.mark.slow
def test_pheno_dc_matches_osd_surface_d3():
    """Measurement-error degeneracy: the DDM cut must rescue BP.

    Under phenomenological noise plain BP stalls on data-vs-measurement
    ambiguities; cutting one node per degeneracy row recovers OSD-level
    failure rates.
    """
    stats = {}
    for decoder, sp in [("bp", None), ("bp-dc", "posterior"), ("bp-osd", None)]:
        cfg = ExperimentConfig(
            code="surface:3", noise="pheno", p=0.03, rounds=3,
            decoder=decoder, trials=1000, seed=21,
            dc_second_priors=sp, max_iter=1000,
        )
        stats[decoder] = run_trials(cfg)
    assert stats["bp-dc"].failure_rate < stats["bp"].failure_rate
    assert not intervals_overlap(
        (stats["bp-dc"].ci_low, stats["bp-dc"].ci_high),
        (stats["bp"].ci_low, stats["bp"].ci_high),
    )
    assert intervals_overlap(
        (stats["bp-dc"].ci_low, stats["bp-dc"].ci_high),
        (stats["bp-osd"].ci_low, stats["bp-osd"].ci_high),
    )


class TestRecords:
    def test_csv_roundtrip_shape(self):
        cfg = ExperimentConfig(
            code="surface:3", noise="code-capacity", p=0.02,
            decoder="bp", trials=50, seed=0,
        )
        rec = sim.stats_record(cfg, run_trials(cfg))
        text = sim.records_to_csv([rec])
        header, row = text.strip().split("\n")
        assert header == sim.CSV_HEADER
        assert len(row.split(",")) == len(header.split(","))

    def test_jsonl(self):
        import json

        cfg = ExperimentConfig(
            code="surface:3", noise="code-capacity", p=0.02,
            decoder="bp", trials=50, seed=0,
        )
        rec = sim.stats_record(cfg, run_trials(cfg))
        parsed = json.loads(sim.records_to_jsonl([rec]).strip())
        assert parsed["decoder"] == "bp" and parsed["trials"] == 50

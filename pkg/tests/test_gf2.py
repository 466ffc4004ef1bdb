"""GF(2) kernel tests against dense numpy oracles and exhaustive enumeration."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qldpc_dc.gf2 import (
    BitVec,
    SparseBinMatrix,
    TripletFormatError,
    in_rowspace,
    load_triplet,
    mat_mat_t,
    mat_vec_t,
    rank,
    save_triplet,
    solve,
)


def dense_mat_vec(v: BitVec, m: SparseBinMatrix) -> np.ndarray:
    """Independent dense reference for v * M^T."""
    return (m.to_dense() @ v.to_dense()) % 2


def dense_rank(m: SparseBinMatrix) -> int:
    """Reference rank via dense elimination."""
    a = m.to_dense().copy()
    r = 0
    for col in range(a.shape[1]):
        rows = np.flatnonzero(a[r:, col]) + r
        if rows.size == 0:
            continue
        a[[r, rows[0]]] = a[[rows[0], r]]
        for rr in range(a.shape[0]):
            if rr != r and a[rr, col]:
                a[rr] ^= a[r]
        r += 1
        if r == a.shape[0]:
            break
    return r


def exhaustive_rowspace(m: SparseBinMatrix) -> set:
    """All 2^rows row combinations; only usable for small matrices."""
    out = set()
    for mask in range(1 << m.rows):
        acc = 0
        for i in range(m.rows):
            if (mask >> i) & 1:
                acc ^= m.row_bits[i]
        out.add(acc)
    return out


@st.composite
def sparse_matrices(draw, max_rows=8, max_cols=10):
    rows = draw(st.integers(1, max_rows))
    cols = draw(st.integers(1, max_cols))
    sups = [
        draw(st.sets(st.integers(0, cols - 1), max_size=cols))
        for _ in range(rows)
    ]
    return SparseBinMatrix(rows, cols, sups)


class TestBitVec:
    def test_from_support_roundtrip(self):
        v = BitVec.from_support(10, [1, 4, 7])
        assert v.support == (1, 4, 7)
        assert v.weight() == 3
        assert v[4] == 1 and v[5] == 0

    def test_duplicate_support_rejected(self):
        with pytest.raises(ValueError):
            BitVec.from_support(5, [1, 1])

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            BitVec.from_support(3, [3])

    def test_xor(self):
        a = BitVec.from_support(6, [0, 2])
        b = BitVec.from_support(6, [2, 5])
        assert (a ^ b).support == (0, 5)

    def test_dense_roundtrip(self):
        v = BitVec.from_support(7, [0, 6])
        assert BitVec.from_dense(v.to_dense()) == v


class TestMatVecT:
    def test_zero_vector(self):
        m = SparseBinMatrix(3, 4, [(0, 1), (2,), (1, 3)])
        assert mat_vec_t(BitVec.zeros(4), m) == BitVec.zeros(3)

    def test_hand_parity(self):
        m = SparseBinMatrix(3, 2, [(0,), (1,), (0, 1)])
        v = BitVec.from_support(2, [0, 1])
        assert mat_vec_t(v, m).support == (0, 1)

    def test_dimension_mismatch(self):
        m = SparseBinMatrix(2, 3, [(0,), (1, 2)])
        with pytest.raises(ValueError):
            mat_vec_t(BitVec.zeros(2), m)

    @given(sparse_matrices(), st.data())
    @settings(max_examples=60)
    def test_matches_dense_oracle(self, m, data):
        sup = data.draw(st.sets(st.integers(0, m.cols - 1), max_size=m.cols))
        v = BitVec.from_support(m.cols, sup)
        assert np.array_equal(mat_vec_t(v, m).to_dense(), dense_mat_vec(v, m))

    @given(sparse_matrices(), st.data())
    @settings(max_examples=40)
    def test_distributes_over_xor(self, m, data):
        a = BitVec.from_support(
            m.cols, data.draw(st.sets(st.integers(0, m.cols - 1)))
        )
        b = BitVec.from_support(
            m.cols, data.draw(st.sets(st.integers(0, m.cols - 1)))
        )
        assert mat_vec_t(a ^ b, m) == mat_vec_t(a, m) ^ mat_vec_t(b, m)


class TestMatMatT:
    def test_identity(self):
        i3 = SparseBinMatrix.identity(3)
        assert mat_mat_t(i3, i3) == i3

    def test_surface_css_orthogonality(self):
        from qldpc_dc.codes import build_rotated_surface

        code = build_rotated_surface(3)
        assert mat_mat_t(code.hz, code.hx).nnz == 0

    @given(sparse_matrices(), st.data())
    @settings(max_examples=40)
    def test_matches_dense_oracle(self, a, data):
        b_rows = data.draw(st.integers(1, 6))
        sups = [
            data.draw(st.sets(st.integers(0, a.cols - 1)))
            for _ in range(b_rows)
        ]
        b = SparseBinMatrix(b_rows, a.cols, sups)
        expect = (a.to_dense() @ b.to_dense().T) % 2
        assert np.array_equal(mat_mat_t(a, b).to_dense(), expect)

    @given(sparse_matrices(), st.data())
    @settings(max_examples=40)
    def test_transpose_identity(self, a, data):
        b_rows = data.draw(st.integers(1, 6))
        sups = [
            data.draw(st.sets(st.integers(0, a.cols - 1)))
            for _ in range(b_rows)
        ]
        b = SparseBinMatrix(b_rows, a.cols, sups)
        assert mat_mat_t(a, b).transpose() == mat_mat_t(b, a)


class TestRank:
    def test_zero_matrix(self):
        assert rank(SparseBinMatrix.zeros(4, 5)) == 0

    def test_identity(self):
        assert rank(SparseBinMatrix.identity(6)) == 6

    def test_bb72_hx_rank(self):
        from qldpc_dc.codes import bb_params, build_bb

        code = build_bb(bb_params(6, 6))
        assert rank(code.hx) == 30
        assert code.n - rank(code.hx) - rank(code.hz) == 12

    @given(sparse_matrices())
    @settings(max_examples=60)
    def test_matches_dense_oracle(self, m):
        assert rank(m) == dense_rank(m)

    @given(sparse_matrices(), st.data())
    @settings(max_examples=40)
    def test_invariant_under_row_ops(self, m, data):
        r0 = rank(m)
        perm = data.draw(st.permutations(range(m.rows)))
        permuted = SparseBinMatrix(m.rows, m.cols, [m.row(i) for i in perm])
        assert rank(permuted) == r0
        if m.rows >= 2:
            i = data.draw(st.integers(0, m.rows - 1))
            j = data.draw(st.integers(0, m.rows - 1))
            if i != j:
                sups = list(m.row_supports)
                merged = set(sups[i]) ^ set(sups[j])
                sups[i] = tuple(sorted(merged))
                assert rank(SparseBinMatrix(m.rows, m.cols, sups)) == r0


class TestSolve:
    def test_zero_syndrome(self):
        m = SparseBinMatrix(2, 3, [(0, 1), (1, 2)])
        x = solve(m, BitVec.zeros(2), [0, 1, 2])
        assert x == BitVec.zeros(3)

    def test_invertible_square_unique(self):
        m = SparseBinMatrix(3, 3, [(0, 1), (1,), (1, 2)])
        s = BitVec.from_support(3, [0, 2])
        for order in itertools.permutations(range(3)):
            x = solve(m, s, list(order))
            assert x is not None
            assert mat_vec_t(x, m) == s
        # unique solution: direct enumeration
        sols = [
            bits
            for bits in range(8)
            if mat_vec_t(BitVec(3, bits), m) == s
        ]
        assert len(sols) == 1

    def test_inconsistent_returns_none(self):
        m = SparseBinMatrix(2, 2, [(0,), (0,)])
        s = BitVec.from_support(2, [0])
        assert solve(m, s, [0, 1]) is None

    @given(sparse_matrices(), st.data())
    @settings(max_examples=60)
    def test_solution_satisfies_system(self, m, data):
        x_true = BitVec.from_support(
            m.cols, data.draw(st.sets(st.integers(0, m.cols - 1)))
        )
        s = mat_vec_t(x_true, m)
        order = list(data.draw(st.permutations(range(m.cols))))
        x = solve(m, s, order)
        assert x is not None
        assert mat_vec_t(x, m) == s
        # the greedy pivot set has at most rank(M) columns
        assert x.weight() <= rank(m)


class TestInRowspace:
    def test_zero_vector(self):
        m = SparseBinMatrix(2, 4, [(0, 1), (2, 3)])
        assert in_rowspace(BitVec.zeros(4), m)

    def test_single_row(self):
        m = SparseBinMatrix(2, 4, [(0, 1), (2, 3)])
        assert in_rowspace(BitVec.from_support(4, [0, 1]), m)

    def test_outside_span(self):
        m = SparseBinMatrix(2, 4, [(0, 1), (2, 3)])
        assert not in_rowspace(BitVec.from_support(4, [0]), m)

    @given(sparse_matrices(max_rows=6, max_cols=8), st.data())
    @settings(max_examples=40)
    def test_matches_exhaustive_span(self, m, data):
        span = exhaustive_rowspace(m)
        sup = data.draw(st.sets(st.integers(0, m.cols - 1)))
        v = BitVec.from_support(m.cols, sup)
        assert in_rowspace(v, m) == (v.bits in span)


class TestTripletFormat:
    def test_roundtrip(self, tmp_path):
        m = SparseBinMatrix(3, 5, [(0, 4), (), (1, 2, 3)])
        path = tmp_path / "m.txt"
        save_triplet(m, path)
        assert load_triplet(path) == m

    def test_header_reports_nnz(self, tmp_path):
        m = SparseBinMatrix(2, 2, [(0,), (0, 1)])
        path = tmp_path / "m.txt"
        save_triplet(m, path)
        assert path.read_text().splitlines()[0] == "2 2 3"

    def test_malformed_line_reports_lineno(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2 2 1\n0 0 7\n")
        with pytest.raises(TripletFormatError, match="line 2"):
            load_triplet(path)

    def test_out_of_range_entry(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2 2 1\n5 0\n")
        with pytest.raises(TripletFormatError, match="line 2"):
            load_triplet(path)

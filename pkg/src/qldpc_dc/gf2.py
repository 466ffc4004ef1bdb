"""Sparse linear algebra over GF(2).

Vectors and matrices are stored by their nonzero positions.  Rows are
mirrored as Python integer bitmasks, so XOR-based elimination, parity
products and row reduction run on machine words without dense scratch
space.  All values are immutable after construction and safe to share
across threads or worker processes.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np


class TripletFormatError(ValueError):
    """Raised when a matrix file does not follow the triplet format."""


def _bits_from_indices(indices: Iterable[int]) -> int:
    bits = 0
    for i in indices:
        bits |= 1 << i
    return bits


def _indices_from_bits(bits: int) -> tuple[int, ...]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return tuple(out)


class BitVec:
    """Immutable binary row vector, stored as a bitmask plus its length."""

    __slots__ = ("length", "_bits")

    def __init__(self, length: int, bits: int = 0):
        if length < 0:
            raise ValueError("length must be nonnegative")
        if bits < 0 or bits >> length:
            raise ValueError("bit set outside vector range")
        self.length = length
        self._bits = bits

    @classmethod
    def from_support(cls, length: int, support: Iterable[int]) -> "BitVec":
        support = tuple(support)
        bits = _bits_from_indices(support)
        if len(support) != bits.bit_count():
            raise ValueError("duplicate indices in support")
        return cls(length, bits)

    @classmethod
    def from_dense(cls, arr) -> "BitVec":
        arr = np.asarray(arr)
        return cls(len(arr), _bits_from_indices(np.flatnonzero(arr).tolist()))

    @classmethod
    def zeros(cls, length: int) -> "BitVec":
        return cls(length, 0)

    @property
    def bits(self) -> int:
        return self._bits

    @property
    def support(self) -> tuple[int, ...]:
        return _indices_from_bits(self._bits)

    def weight(self) -> int:
        return self._bits.bit_count()

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.length, dtype=np.uint8)
        out[list(self.support)] = 1
        return out

    def __xor__(self, other: "BitVec") -> "BitVec":
        if self.length != other.length:
            raise ValueError("length mismatch in xor")
        return BitVec(self.length, self._bits ^ other._bits)

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self._bits >> i) & 1

    def __len__(self) -> int:
        return self.length

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitVec)
            and self.length == other.length
            and self._bits == other._bits
        )

    def __hash__(self) -> int:
        return hash((self.length, self._bits))

    def __repr__(self) -> str:
        return f"BitVec(length={self.length}, support={self.support})"


class SparseBinMatrix:
    """Immutable sparse binary matrix with row and column adjacency.

    Both views are kept because Tanner-graph traversal needs row->column
    and column->row lookups every message-passing iteration.
    """

    __slots__ = ("rows", "cols", "_row_supports", "_col_supports", "_row_bits")

    def __init__(self, rows: int, cols: int, row_supports: Sequence[Iterable[int]]):
        row_supports = [tuple(sorted(s)) for s in row_supports]
        if len(row_supports) != rows:
            raise ValueError("row count does not match row_supports")
        cols_acc: list[list[int]] = [[] for _ in range(cols)]
        bits = []
        for i, sup in enumerate(row_supports):
            prev = -1
            for j in sup:
                if j <= prev:
                    raise ValueError(f"row {i}: duplicate column index {j}")
                if not 0 <= j < cols:
                    raise ValueError(f"row {i}: column index {j} out of range")
                cols_acc[j].append(i)
                prev = j
            bits.append(_bits_from_indices(sup))
        self.rows = rows
        self.cols = cols
        self._row_supports = tuple(row_supports)
        self._col_supports = tuple(tuple(c) for c in cols_acc)
        self._row_bits = tuple(bits)

    @classmethod
    def from_entries(
        cls, rows: int, cols: int, entries: Iterable[tuple[int, int]]
    ) -> "SparseBinMatrix":
        """Build from (row, col) pairs; repeated entries cancel mod 2."""
        acc: dict[int, set[int]] = {}
        for i, j in entries:
            acc.setdefault(i, set()).symmetric_difference_update((j,))
        return cls(rows, cols, [acc.get(i, ()) for i in range(rows)])

    @classmethod
    def from_dense(cls, arr) -> "SparseBinMatrix":
        arr = np.asarray(arr) % 2
        return cls(
            arr.shape[0],
            arr.shape[1],
            [np.flatnonzero(row).tolist() for row in arr],
        )

    @classmethod
    def identity(cls, n: int) -> "SparseBinMatrix":
        return cls(n, n, [(i,) for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "SparseBinMatrix":
        return cls(rows, cols, [()] * rows)

    @classmethod
    def vstack(cls, mats: Sequence["SparseBinMatrix"]) -> "SparseBinMatrix":
        cols = mats[0].cols
        if any(m.cols != cols for m in mats):
            raise ValueError("column count mismatch in vstack")
        sups: list[tuple[int, ...]] = []
        for m in mats:
            sups.extend(m.row_supports)
        return cls(sum(m.rows for m in mats), cols, sups)

    @classmethod
    def hstack(cls, mats: Sequence["SparseBinMatrix"]) -> "SparseBinMatrix":
        rows = mats[0].rows
        if any(m.rows != rows for m in mats):
            raise ValueError("row count mismatch in hstack")
        sups = []
        for i in range(rows):
            row: list[int] = []
            off = 0
            for m in mats:
                row.extend(j + off for j in m.row(i))
                off += m.cols
            sups.append(row)
        return cls(rows, sum(m.cols for m in mats), sups)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return sum(len(s) for s in self._row_supports)

    @property
    def row_supports(self) -> tuple[tuple[int, ...], ...]:
        return self._row_supports

    @property
    def col_supports(self) -> tuple[tuple[int, ...], ...]:
        return self._col_supports

    @property
    def row_bits(self) -> tuple[int, ...]:
        return self._row_bits

    def row(self, i: int) -> tuple[int, ...]:
        return self._row_supports[i]

    def col(self, j: int) -> tuple[int, ...]:
        return self._col_supports[j]

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for i, sup in enumerate(self._row_supports):
            out[i, list(sup)] = 1
        return out

    def transpose(self) -> "SparseBinMatrix":
        return SparseBinMatrix(self.cols, self.rows, self._col_supports)

    def without_columns(
        self, removed: Iterable[int]
    ) -> tuple["SparseBinMatrix", np.ndarray]:
        """Drop the given columns.

        Returns the reduced matrix and the array of kept original column
        indices (so solutions can be re-expanded to full width).
        """
        removed = set(removed)
        kept = np.array([j for j in range(self.cols) if j not in removed], dtype=np.intp)
        remap = {int(j): pos for pos, j in enumerate(kept)}
        sups = [
            tuple(remap[j] for j in sup if j not in removed)
            for sup in self._row_supports
        ]
        return SparseBinMatrix(self.rows, len(kept), sups), kept

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseBinMatrix)
            and self.shape == other.shape
            and self._row_supports == other._row_supports
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._row_supports))

    def __repr__(self) -> str:
        return f"SparseBinMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


def mat_vec_t(v: BitVec, m: SparseBinMatrix) -> BitVec:
    """Compute v * M^T, the parity of v against every row of M."""
    if v.length != m.cols:
        raise ValueError(f"vector length {v.length} != matrix cols {m.cols}")
    vb = v.bits
    out = 0
    for i, row_bits in enumerate(m.row_bits):
        if (vb & row_bits).bit_count() & 1:
            out |= 1 << i
    return BitVec(m.rows, out)


def mat_mat_t(a: SparseBinMatrix, b: SparseBinMatrix) -> SparseBinMatrix:
    """Compute A * B^T over GF(2)."""
    if a.cols != b.cols:
        raise ValueError(f"column mismatch: {a.cols} != {b.cols}")
    b_bits = b.row_bits
    sups = []
    for abits in a.row_bits:
        sups.append(
            tuple(j for j, bbits in enumerate(b_bits) if (abits & bbits).bit_count() & 1)
        )
    return SparseBinMatrix(a.rows, b.rows, sups)


def rank(m: SparseBinMatrix) -> int:
    """GF(2) rank via bitmask row elimination."""
    pivots: dict[int, int] = {}
    r = 0
    for bits in m.row_bits:
        cur = bits
        while cur:
            col = (cur & -cur).bit_length() - 1
            if col in pivots:
                cur ^= pivots[col]
            else:
                pivots[col] = cur
                r += 1
                break
    return r


def solve(
    m: SparseBinMatrix, s: BitVec, pivot_order: Sequence[int]
) -> Optional[BitVec]:
    """Solve x * M^T = s with greedy pivoting in the given column order.

    Columns are tried as pivots in ``pivot_order``; among candidate rows the
    lowest index wins.  The returned solution is supported only on pivot
    columns.  Returns None when the system is inconsistent.
    """
    if s.length != m.rows:
        raise ValueError(f"syndrome length {s.length} != matrix rows {m.rows}")
    if sorted(pivot_order) != list(range(m.cols)):
        raise ValueError("pivot_order must be a permutation of column indices")
    eqs = list(m.row_bits)
    rhs = [(s.bits >> i) & 1 for i in range(m.rows)]
    used = [False] * m.rows
    pivot_rows: list[tuple[int, int]] = []  # (column, row)
    for col in pivot_order:
        mask = 1 << col
        pr = -1
        for r in range(m.rows):
            if not used[r] and eqs[r] & mask:
                pr = r
                break
        if pr < 0:
            continue
        used[pr] = True
        pivot_rows.append((col, pr))
        for r in range(m.rows):
            if r != pr and eqs[r] & mask:
                eqs[r] ^= eqs[pr]
                rhs[r] ^= rhs[pr]
    for r in range(m.rows):
        if not used[r] and rhs[r]:
            return None
    x = 0
    for col, r in pivot_rows:
        if rhs[r]:
            x |= 1 << col
    return BitVec(m.cols, x)


def in_rowspace(v: BitVec, m: SparseBinMatrix) -> bool:
    """Test whether v lies in the row space of M."""
    if v.length != m.cols:
        raise ValueError(f"vector length {v.length} != matrix cols {m.cols}")
    pivots: dict[int, int] = {}
    for bits in m.row_bits:
        cur = bits
        while cur:
            col = (cur & -cur).bit_length() - 1
            if col in pivots:
                cur ^= pivots[col]
            else:
                pivots[col] = cur
                break
    cur = v.bits
    while cur:
        col = (cur & -cur).bit_length() - 1
        if col not in pivots:
            return False
        cur ^= pivots[col]
    return True


def save_triplet(m: SparseBinMatrix, path) -> None:
    """Write a matrix in the text triplet format.

    First line is ``rows cols nnz``; each following line is one ``i j``
    pair for an entry equal to 1, zero-indexed.
    """
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{m.rows} {m.cols} {m.nnz}\n")
        for i, sup in enumerate(m.row_supports):
            for j in sup:
                f.write(f"{i} {j}\n")


def load_triplet(path) -> SparseBinMatrix:
    """Read a matrix written by :func:`save_triplet`.

    Raises TripletFormatError naming the offending line on malformed input.
    """
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise TripletFormatError(f"{path}: empty file")
    head = lines[0].split()
    if len(head) != 3:
        raise TripletFormatError(f"{path}: line 1: expected 'rows cols nnz'")
    try:
        rows, cols, nnz = (int(t) for t in head)
    except ValueError as exc:
        raise TripletFormatError(f"{path}: line 1: non-integer header") from exc
    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise TripletFormatError(f"{path}: line {lineno}: expected 'i j'")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise TripletFormatError(
                f"{path}: line {lineno}: non-integer entry"
            ) from exc
        if not (0 <= i < rows and 0 <= j < cols):
            raise TripletFormatError(f"{path}: line {lineno}: index out of range")
        entries.append((i, j))
    if len(entries) != nnz:
        raise TripletFormatError(
            f"{path}: header declares nnz={nnz} but file has {len(entries)} entries"
        )
    try:
        return SparseBinMatrix.from_entries(rows, cols, entries)
    except ValueError as exc:
        raise TripletFormatError(f"{path}: {exc}") from exc

"""Constructors for rotated surface codes and bivariate bicycle codes.

Both families are CSS codes described by a pair of parity-check matrices
plus logical operator matrices.  Constructors are deterministic and
validate the CSS identities at build time.
"""

from __future__ import annotations

from dataclasses import dataclass

from .gf2 import BitVec, SparseBinMatrix, mat_mat_t, rank


@dataclass(frozen=True)
class CssCode:
    """A CSS code bundle: check matrices, logical operator matrices, parameters."""

    n: int
    k: int
    hx: SparseBinMatrix
    hz: SparseBinMatrix
    ox: SparseBinMatrix
    oz: SparseBinMatrix
    label: str

    def validate(self) -> None:
        if mat_mat_t(self.hz, self.hx).nnz != 0:
            raise ValueError("H_Z * H_X^T != 0")
        if mat_mat_t(self.oz, self.hx).nnz != 0:
            raise ValueError("O_Z * H_X^T != 0")
        if mat_mat_t(self.ox, self.hz).nnz != 0:
            raise ValueError("O_X * H_Z^T != 0")
        if rank(mat_mat_t(self.ox, self.oz)) != self.k:
            raise ValueError("O_X * O_Z^T is not full rank")
        if self.k != self.n - rank(self.hx) - rank(self.hz):
            raise ValueError("k != n - rank(H_X) - rank(H_Z)")


@dataclass(frozen=True)
class BbParams:
    """Parameters of a bivariate bicycle code.

    Each monomial is a (base, exponent) pair with base 'x' or 'y'; exponents
    are reduced modulo l for x and modulo m for y.
    """

    l: int
    m: int
    a_monomials: tuple[tuple[str, int], ...]
    b_monomials: tuple[tuple[str, int], ...]

    def __post_init__(self):
        if self.l < 1 or self.m < 1:
            raise ValueError("l and m must be positive")
        for name in ("a_monomials", "b_monomials"):
            monos = getattr(self, name)
            if len(monos) != 3:
                raise ValueError(f"{name} must contain exactly 3 monomials")
            reduced = []
            for base, exp in monos:
                if base not in ("x", "y"):
                    raise ValueError(f"monomial base must be 'x' or 'y', got {base!r}")
                if exp < 0:
                    raise ValueError("monomial exponent must be nonnegative")
                reduced.append((base, exp % (self.l if base == "x" else self.m)))
            if len(set(reduced)) != 3:
                raise ValueError(f"{name} monomials are not distinct")
            object.__setattr__(self, name, tuple(reduced))


def parse_monomials(text: str) -> tuple[tuple[str, int], ...]:
    """Parse a CLI monomial list such as 'x3,y1,y2'."""
    out = []
    for token in text.split(","):
        token = token.strip()
        if len(token) < 2 or token[0] not in ("x", "y"):
            raise ValueError(f"bad monomial {token!r}, expected like 'x3' or 'y2'")
        out.append((token[0], int(token[1:])))
    return tuple(out)


def bb_params(l: int, m: int) -> BbParams:
    """BbParams with the standard A = x^3+y+y^2, B = y^3+x+x^2 monomials."""
    return BbParams(
        l=l,
        m=m,
        a_monomials=(("x", 3), ("y", 1), ("y", 2)),
        b_monomials=(("y", 3), ("x", 1), ("x", 2)),
    )


# published distances for the standard-monomial parameter sets; carried as
# metadata only (distance computation is out of scope here)
KNOWN_BB_DISTANCES = {(6, 6): 6, (9, 6): 10, (12, 6): 12}


def known_distance(params_or_code) -> int | None:
    """Cited distance for a known BB parameter set, or the surface-code d."""
    if isinstance(params_or_code, BbParams):
        if params_or_code == bb_params(params_or_code.l, params_or_code.m):
            return KNOWN_BB_DISTANCES.get((params_or_code.l, params_or_code.m))
        return None
    label = getattr(params_or_code, "label", "")
    if label.startswith("surface-d"):
        return int(label.removeprefix("surface-d"))
    return None


def monomial_permutation(l: int, m: int, base: str, exp: int) -> list[int]:
    """Permutation i -> j of the lm group indices realized by x^exp or y^exp.

    Index (i1, i2) of the l x m torus is flattened as i1*m + i2.  The shift
    matrix convention is S[i, j] = 1 iff j = i + 1 mod size, so x^e sends
    row index i1 to i1+e and y^e sends i2 to i2+e.
    """
    perm = []
    for i1 in range(l):
        for i2 in range(m):
            if base == "x":
                perm.append(((i1 + exp) % l) * m + i2)
            else:
                perm.append(i1 * m + (i2 + exp) % m)
    return perm


def bb_block_permutations(params: BbParams) -> tuple[list[list[int]], list[list[int]]]:
    """The six monomial permutations (A1, A2, A3) and (B1, B2, B3)."""
    a = [monomial_permutation(params.l, params.m, b, e) for b, e in params.a_monomials]
    b = [monomial_permutation(params.l, params.m, b_, e) for b_, e in params.b_monomials]
    return a, b


def build_bb(params: BbParams) -> CssCode:
    """Bivariate bicycle code with H_X = [A|B], H_Z = [B^T|A^T], n = 2lm."""
    s = params.l * params.m
    n = 2 * s
    a_perms, b_perms = bb_block_permutations(params)
    a_inv = [_invert(p) for p in a_perms]
    b_inv = [_invert(p) for p in b_perms]

    hx_rows = []
    hz_rows = []
    for i in range(s):
        row_a = {p[i] for p in a_perms}
        row_b = {p[i] + s for p in b_perms}
        if len(row_a) != 3 or len(row_b) != 3:
            raise ValueError("monomials collide to the same permutation")
        hx_rows.append(sorted(row_a | row_b))
        # H_Z row i: B^T row = preimages under B, A^T row = preimages under A
        row_bt = {p[i] for p in b_inv}
        row_at = {p[i] + s for p in a_inv}
        hz_rows.append(sorted(row_bt | row_at))
    hx = SparseBinMatrix(s, n, hx_rows)
    hz = SparseBinMatrix(s, n, hz_rows)
    k = n - rank(hx) - rank(hz)
    ox, oz = compute_logicals(hx, hz)
    code = CssCode(n=n, k=k, hx=hx, hz=hz, ox=ox, oz=oz,
                   label=f"bb-{n}-{k}-l{params.l}m{params.m}")
    code.validate()
    return code


def _invert(perm: list[int]) -> list[int]:
    inv = [0] * len(perm)
    for i, j in enumerate(perm):
        inv[j] = i
    return inv


def build_rotated_surface(d: int) -> CssCode:
    """Rotated surface code on a d x d lattice, parameters [[d^2, 1, d]].

    Qubit (r, c) is indexed r*d + c.  Faces (i, j) between lattice rows
    i, i+1 and columns j, j+1 host weight-4 checks; the checkerboard color
    (i + j even -> Z, odd -> X) extends to the boundary, where weight-2
    X checks sit on the top/bottom edges and weight-2 Z checks on the
    left/right edges.
    """
    if d < 3 or d % 2 == 0:
        raise ValueError("d must be an odd integer >= 3")
    n = d * d

    def q(r: int, c: int) -> int:
        return r * d + c

    x_rows = []
    z_rows = []
    for i in range(d - 1):
        for j in range(d - 1):
            face = [q(i, j), q(i, j + 1), q(i + 1, j), q(i + 1, j + 1)]
            (z_rows if (i + j) % 2 == 0 else x_rows).append(face)
    for j in range(0, d - 1, 2):  # top X checks at even j
        x_rows.append([q(0, j), q(0, j + 1)])
    for j in range(1, d - 1, 2):  # bottom X checks at odd j
        x_rows.append([q(d - 1, j), q(d - 1, j + 1)])
    for i in range(1, d - 1, 2):  # left Z checks at odd i
        z_rows.append([q(i, 0), q(i + 1, 0)])
    for i in range(0, d - 1, 2):  # right Z checks at even i
        z_rows.append([q(i, d - 1), q(i + 1, d - 1)])

    hx = SparseBinMatrix(len(x_rows), n, x_rows)
    hz = SparseBinMatrix(len(z_rows), n, z_rows)
    k = n - rank(hx) - rank(hz)
    if k != 1:
        raise ValueError(f"surface construction gave k={k}, expected 1")
    ox, oz = compute_logicals(hx, hz)
    code = CssCode(n=n, k=k, hx=hx, hz=hz, ox=ox, oz=oz, label=f"surface-d{d}")
    code.validate()
    return code


def _rref_pivots(m: SparseBinMatrix) -> dict[int, int]:
    """Reduced pivot rows of the row space, keyed by pivot column."""
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
    return pivots


def _nullspace_basis(m: SparseBinMatrix) -> list[int]:
    """Bitmask basis of {v : M v^T = 0} via back-substitution on the RREF."""
    pivots = _rref_pivots(m)
    # full reduction so every pivot row has zeros in all other pivot columns
    cols = sorted(pivots)
    for c in cols:
        row = pivots[c]
        for c2 in cols:
            if c2 != c and (row >> c2) & 1:
                row ^= pivots[c2]
        pivots[c] = row
    free = [j for j in range(m.cols) if j not in pivots]
    basis = []
    for f in free:
        v = 1 << f
        for c, row in pivots.items():
            if (row >> f) & 1:
                v |= 1 << c
        basis.append(v)
    return basis


def compute_logicals(
    hx: SparseBinMatrix, hz: SparseBinMatrix
) -> tuple[SparseBinMatrix, SparseBinMatrix]:
    """Logical operator matrices (O_X, O_Z) for a CSS pair.

    O_Z rows span a complement of rowspace(H_Z) inside the nullspace of
    H_X (and symmetrically for O_X); the O_X basis is then adjusted so
    that O_X * O_Z^T is the identity.
    """
    if mat_mat_t(hz, hx).nnz != 0:
        raise ValueError("H_Z * H_X^T != 0")
    n = hx.cols
    k = n - rank(hx) - rank(hz)

    def pick(kernel_of: SparseBinMatrix, modulo: SparseBinMatrix) -> list[int]:
        chosen: list[int] = []
        span = dict(_rref_pivots(modulo))
        for v in _nullspace_basis(kernel_of):
            cur = v
            while cur:
                col = (cur & -cur).bit_length() - 1
                if col in span:
                    cur ^= span[col]
                else:
                    break
            if cur:
                span[(cur & -cur).bit_length() - 1] = cur
                chosen.append(v)
                if len(chosen) == k:
                    break
        if len(chosen) != k:
            raise ValueError("could not find k independent logical representatives")
        return chosen

    oz_rows = pick(hx, hz)
    ox_rows = pick(hz, hx)
    oz = SparseBinMatrix(
        k, n, [[j for j in range(n) if (v >> j) & 1] for v in oz_rows]
    )
    ox = SparseBinMatrix(
        k, n, [[j for j in range(n) if (v >> j) & 1] for v in ox_rows]
    )
    # pair the bases: O_X <- G^{-1} O_X with G = O_X O_Z^T
    g = mat_mat_t(ox, oz)
    ginv = _invert_gf2(g)
    ox = mat_mat_t(ginv, ox.transpose())
    return ox, oz


def _invert_gf2(m: SparseBinMatrix) -> SparseBinMatrix:
    if m.rows != m.cols:
        raise ValueError("only square matrices can be inverted")
    k = m.rows
    # augmented rows [m | I]
    aug = [bits | (1 << (k + i)) for i, bits in enumerate(m.row_bits)]
    row_idx = 0
    for col in range(k):
        pr = -1
        for r in range(row_idx, k):
            if (aug[r] >> col) & 1:
                pr = r
                break
        if pr < 0:
            raise ValueError("matrix is singular over GF(2)")
        aug[row_idx], aug[pr] = aug[pr], aug[row_idx]
        for r in range(k):
            if r != row_idx and (aug[r] >> col) & 1:
                aug[r] ^= aug[row_idx]
        row_idx += 1
    sups = [[j for j in range(k) if (aug[i] >> (k + j)) & 1] for i in range(k)]
    return SparseBinMatrix(k, k, sups)


def reduce_logical_weight(v: BitVec, stabilizers: SparseBinMatrix) -> BitVec:
    """Greedy weight reduction: add stabilizer rows while weight decreases.

    Representatives are not weight-minimized; this is only a sanity helper
    for 'weight >= d' checks on logical rows.
    """
    best = v.bits
    improved = True
    while improved:
        improved = False
        for row in stabilizers.row_bits:
            cand = best ^ row
            if cand.bit_count() < best.bit_count():
                best = cand
                improved = True
    return BitVec(v.length, best)

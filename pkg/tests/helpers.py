"""Shared test oracles: random acyclic instances and exhaustive posteriors."""

import numpy as np

from qldpc_dc.gf2 import SparseBinMatrix


def random_forest_checks(rng: np.random.Generator) -> SparseBinMatrix:
    """Random acyclic parity-check structure on 2..16 variables.

    Checks join variables drawn from distinct union-find components, so
    the bipartite Tanner graph is always a forest.
    """
    nv = int(rng.integers(2, 17))
    parent = list(range(nv))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    rows = []
    for _ in range(int(rng.integers(1, nv))):
        comps = {}
        for v in range(nv):
            comps.setdefault(find(v), []).append(v)
        groups = list(comps.values())
        ksize = int(rng.integers(1, min(len(groups), 4) + 1))
        chosen = rng.choice(len(groups), size=ksize, replace=False)
        row = sorted(int(rng.choice(groups[g])) for g in chosen)
        for v in row[1:]:
            parent[find(v)] = find(row[0])
        rows.append(row)
    return SparseBinMatrix(len(rows), nv, rows)


def exact_marginals_vectorized(h: SparseBinMatrix, s_dense, priors) -> np.ndarray:
    """Exhaustive syndrome-conditioned marginals over all 2^n patterns."""
    nv = h.cols
    idx = np.arange(1 << nv, dtype=np.uint32)
    bits = ((idx[:, None] >> np.arange(nv, dtype=np.uint32)) & 1).astype(np.uint8)
    syn = bits @ h.to_dense().T % 2
    mask = np.all(syn == np.asarray(s_dense, dtype=np.uint8), axis=1)
    priors = np.asarray(priors, dtype=float)
    logw = bits @ np.log(priors / (1 - priors)) + np.log(1 - priors).sum()
    w = np.where(mask, np.exp(logw), 0.0)
    return (w @ bits) / w.sum()

"""Error sampling from independent mechanism priors.

Trial streams are counter-based (Philox keyed by master seed and trial
index), so results do not depend on execution order or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detmodel import DetectorModel
from .gf2 import BitVec, mat_vec_t

RNG_ALGORITHM = "philox4x64"


@dataclass(frozen=True, eq=False)
class TrialSample:
    error: BitVec
    syndrome: BitVec


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    key = np.array(
        [master_seed & 0xFFFFFFFFFFFFFFFF, trial_index & 0xFFFFFFFFFFFFFFFF],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


def sample_error(priors, rng: np.random.Generator) -> BitVec:
    priors = np.asarray(priors, dtype=float)
    if priors.size and (priors.min() <= 0.0 or priors.max() >= 1.0):
        raise ValueError("priors must lie strictly inside (0, 1)")
    return BitVec.from_dense(rng.random(priors.shape[0]) < priors)


def make_trial(model: DetectorModel, rng: np.random.Generator) -> TrialSample:
    error = sample_error(model.priors, rng)
    return TrialSample(error=error, syndrome=mat_vec_t(error, model.check_matrix))

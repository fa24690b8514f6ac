"""Synthetic corpus whose vocabulary deterministically encodes target magnitudes.

Each message carries one effort-level marker. Level 0 is marked by the token
"typo", the top level by the bigram "refactor interface", and intermediate
levels by "lv1".."lv6". Every metric is an integer count derived from the
level through a per-metric scale in log space, plus small lognormal noise, so
text models can learn the mapping while a distribution-sampling baseline
cannot.
"""

from __future__ import annotations

import numpy as np

from .churn import EffortVector
from .dataset import DatasetRecord
from .satd import rule_detect
from .significance import SignificanceProfile

LOW_TOKEN = "typo"
HIGH_NGRAM = "refactor interface"

N_LEVELS = 8
LEVEL_STEP = 0.5
NOISE_SD = 0.15

#: Log-space scale per sampled metric; lt and ft are derived sums.
SCALES = {
    "la": 1.0,
    "ld": 0.92,
    "fa": 0.55,
    "fd": 0.5,
    "fm": 0.6,
    "lcc": 0.85,
    "mcc": 0.75,
    "hcc": 0.55,
    "ccc": 0.5,
}

_FILLERS = [f"f{i:02d}" for i in range(30)]


def _marker_tokens(level: int) -> list[str]:
    if level == 0:
        return [LOW_TOKEN]
    if level == N_LEVELS - 1:
        return HIGH_NGRAM.split()
    return [f"lv{level}"]


def _message(level: int, rng: np.random.Generator) -> str:
    n_fillers = int(rng.integers(7, 13))
    tokens = [str(rng.choice(_FILLERS)) for _ in range(n_fillers)]
    pos = int(rng.integers(0, n_fillers + 1))
    tokens[pos:pos] = _marker_tokens(level)
    return " ".join(tokens)


def _count(level: int, scale: float, rng: np.random.Generator) -> int:
    z = scale * LEVEL_STEP * level + rng.normal(0.0, NOISE_SD)
    return max(0, int(round(np.expm1(z))))


def generate_planted_dataset(n: int, seed: int) -> list[DatasetRecord]:
    """Generate n records with text-predictable targets."""
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        level = int(rng.integers(0, N_LEVELS))
        message = _message(level, rng)
        values = {name: _count(level, scale, rng) for name, scale in SCALES.items()}
        effort = EffortVector(
            la=values["la"], ld=values["ld"], fa=values["fa"], fd=values["fd"], fm=values["fm"]
        )
        significance = SignificanceProfile(
            lcc=values["lcc"], mcc=values["mcc"], hcc=values["hcc"], ccc=values["ccc"]
        )
        records.append(
            DatasetRecord(
                repo_id="planted",
                sha=f"{i:040x}",
                timestamp=1_500_000_000 + i,
                message=message,
                label=rule_detect(message),
                effort=effort,
                significance=significance,
            )
        )
    return records

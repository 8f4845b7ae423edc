"""TOPSIS and EDAS scorers over an alternatives-by-criteria decision matrix.

Both return per-alternative scores in [0, 1] (higher = better) which
``scores_to_weights`` turns into a weight vector. Degenerate inputs resolve
by explicit conventions rather than NaNs; every convention that fires is
recorded on the result's ``flags``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import Weights

logger = logging.getLogger(__name__)

BENEFIT = "benefit"
COST = "cost"


@dataclass
class DecisionMatrix:
    """m alternatives x n criteria, each criterion tagged benefit or cost."""

    values: np.ndarray
    directions: tuple[str, ...]
    criterion_weights: Weights

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).copy()
        self.directions = tuple(self.directions)
        if self.values.ndim != 2:
            raise ValueError("values must be a 2-D matrix")
        m, n = self.values.shape
        if m < 2 or n < 1:
            raise ValueError("need at least 2 alternatives and 1 criterion")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("matrix entries must be finite")
        if len(self.directions) != n:
            raise ValueError("one direction per criterion required")
        for dir_ in self.directions:
            if dir_ not in (BENEFIT, COST):
                raise ValueError(f"unknown direction {dir_!r}")
        if len(self.criterion_weights.values) != n:
            raise ValueError("one weight per criterion required")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass
class McdmResult:
    scores: np.ndarray
    method: str
    flags: tuple[str, ...] = field(default=())

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("scores must be finite")
        if np.any(self.scores < -1e-12) or np.any(self.scores > 1 + 1e-12):
            raise ValueError("scores must lie in [0, 1]")


def topsis(dm: DecisionMatrix) -> McdmResult:
    """Closeness to the ideal solution.

    Vector-normalize each column, weight it, take per-direction ideal and
    anti-ideal points, and score each alternative by S-/(S+ + S-). Columns
    with negative entries are min-shifted first (vector normalization assumes
    nonnegative data); an all-zero column contributes zeros; identical
    alternatives all score 0.5.
    """
    x = dm.values.copy()
    m, n = x.shape
    w = dm.criterion_weights.as_array()
    flags = []

    for j in range(n):
        col_min = x[:, j].min()
        if col_min < 0:
            x[:, j] = x[:, j] - col_min + 1e-9
            flags.append(f"column {j} min-shifted to nonnegative")

    r = np.zeros_like(x)
    for j in range(n):
        norm = np.sqrt((x[:, j] ** 2).sum())
        if norm == 0:
            flags.append(f"column {j} all zero, skipped in normalization")
            logger.info("topsis: column %d all zero, contributes nothing", j)
            continue
        r[:, j] = x[:, j] / norm

    v = r * w
    pis = np.empty(n)
    nis = np.empty(n)
    for j in range(n):
        if dm.directions[j] == BENEFIT:
            pis[j], nis[j] = v[:, j].max(), v[:, j].min()
        else:
            pis[j], nis[j] = v[:, j].min(), v[:, j].max()

    s_plus = np.sqrt(((v - pis) ** 2).sum(axis=1))
    s_minus = np.sqrt(((v - nis) ** 2).sum(axis=1))

    scores = np.empty(m)
    for i in range(m):
        total = s_plus[i] + s_minus[i]
        if total == 0:
            scores[i] = 0.5
            if "identical alternatives scored 0.5" not in flags:
                flags.append("identical alternatives scored 0.5")
        else:
            scores[i] = s_minus[i] / total
    return McdmResult(scores, "topsis", tuple(flags))


def edas(dm: DecisionMatrix) -> McdmResult:
    """Appraisal scores from positive/negative distances to the average solution.

    PDA/NDA are raw (unscaled) distances from the column average, oriented by
    direction; weighted sums are normalized against the best alternative on
    each side and averaged. Degenerate sides resolve to 0 (no positive
    distance anywhere) or 1 (no negative distance anywhere).
    """
    x = dm.values
    m, n = x.shape
    w = dm.criterion_weights.as_array()
    flags = []

    avg = x.mean(axis=0)
    pda = np.zeros_like(x)
    nda = np.zeros_like(x)
    for j in range(n):
        if dm.directions[j] == BENEFIT:
            pda[:, j] = np.maximum(0.0, x[:, j] - avg[j])
            nda[:, j] = np.maximum(0.0, avg[j] - x[:, j])
        else:
            pda[:, j] = np.maximum(0.0, avg[j] - x[:, j])
            nda[:, j] = np.maximum(0.0, x[:, j] - avg[j])

    sp = pda @ w
    sn = nda @ w
    max_sp = sp.max()
    max_sn = sn.max()

    if max_sp == 0:
        nsp = np.zeros(m)
        flags.append("max positive distance is zero, NSP set to 0")
    else:
        nsp = sp / max_sp
    if max_sn == 0:
        nsn = np.ones(m)
        flags.append("max negative distance is zero, NSN set to 1")
    else:
        nsn = 1.0 - sn / max_sn
    if max_sp == 0 and max_sn == 0:
        flags.append("identical alternatives scored 0.5")

    scores = (nsp + nsn) / 2.0
    return McdmResult(scores, "edas", tuple(flags))


def scores_to_weights(res: McdmResult) -> Weights:
    """Normalize scores into a weight vector; an all-zero vector becomes uniform."""
    s = np.asarray(res.scores, dtype=float)
    if np.any(s < 0):
        raise ValueError("scores must be nonnegative")
    total = s.sum()
    if total == 0:
        logger.info("scores_to_weights: all scores zero, using uniform weights")
        return Weights.uniform(s.size)
    return Weights(tuple(s / total))


METHODS = {"topsis": topsis, "edas": edas}


def run_mcdm(method: str, dm: DecisionMatrix) -> McdmResult:
    if method not in METHODS:
        raise ValueError(f"unknown MCDM method {method!r}; expected one of {sorted(METHODS)}")
    return METHODS[method](dm)

"""Three-class conditional probabilities and their binary-ROC reductions.

All rates are exact integer counts divided once at the end, so the far and
doubletalk rows sum to 1 identically. The change-row denominator includes
far-silent/echo-silent samples that no numerator covers, so its row sum can
fall short of 1; normalization_residuals reports that gap instead of hiding it.
"""

from dataclasses import dataclass

import numpy as np

from .signals import as_activity


class EmptyConditionClassError(ValueError):
    """A ground-truth condition class has no samples in the run."""

    def __init__(self, which: str):
        self.which = which
        super().__init__(f"empty condition class: {which}")


@dataclass
class LabeledRun:
    """The six per-sample vectors a three-class evaluation needs.

    x, v, y: far-end, near-end and echo activity; c: change indicator;
    phi, epsilon: first- and second-stage detector outputs.
    """

    x: np.ndarray
    v: np.ndarray
    y: np.ndarray
    c: np.ndarray
    phi: np.ndarray
    epsilon: np.ndarray

    def __post_init__(self):
        for name in ("x", "v", "y", "c", "phi", "epsilon"):
            setattr(self, name, as_activity(getattr(self, name)))
        lengths = {len(getattr(self, n)) for n in ("x", "v", "y", "c", "phi", "epsilon")}
        if len(lengths) != 1:
            raise ValueError("all six vectors must share one length")

    @property
    def n_total(self) -> int:
        return len(self.x)


@dataclass
class ThreeClassProbs:
    """The nine conditional misclassification/correct-classification rates."""

    p_ff: float
    p_fd: float
    p_fc: float
    p_df: float
    p_dd: float
    p_dc: float
    p_cf: float
    p_cd: float
    p_cc: float
    denom_far: int
    denom_dbl: int
    denom_chg: int

    _FIELDS = ("p_ff", "p_fd", "p_fc", "p_df", "p_dd", "p_dc", "p_cf", "p_cd", "p_cc")

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self._FIELDS}
        d.update(denom_far=self.denom_far, denom_dbl=self.denom_dbl, denom_chg=self.denom_chg)
        return d


@dataclass
class BinaryRoc:
    p_f: float
    p_m: float


def _pack_counts(run: LabeledRun) -> np.ndarray:
    """Single-pass 6-bit histogram over (x, v, y, c, phi, epsilon)."""
    code = (run.x.astype(np.int64) << 5) | (run.v.astype(np.int64) << 4) \
        | (run.y.astype(np.int64) << 3) | (run.c.astype(np.int64) << 2) \
        | (run.phi.astype(np.int64) << 1) | run.epsilon.astype(np.int64)
    return np.bincount(code, minlength=64)


def _sum_where(bins, x=None, v=None, y=None, c=None, phi=None, eps=None) -> int:
    total = 0
    for code in range(64):
        bx, bv, by = (code >> 5) & 1, (code >> 4) & 1, (code >> 3) & 1
        bc, bphi, beps = (code >> 2) & 1, (code >> 1) & 1, code & 1
        if x is not None and bx != x:
            continue
        if v is not None and bv != v:
            continue
        if y is not None and by != y:
            continue
        if c is not None and bc != c:
            continue
        if phi is not None and bphi != phi:
            continue
        if eps is not None and beps != eps:
            continue
        total += int(bins[code])
    return total


def three_class_probs(run: LabeledRun, allow_empty=()) -> ThreeClassProbs:
    """Compute the nine conditional probabilities over a labeled run.

    Row conditions: far = x AND NOT v AND NOT c; doubletalk = x AND v;
    change = (x OR (NOT x AND NOT y)) AND NOT v AND c. A condition class
    with no samples raises EmptyConditionClassError unless its name
    ("far", "doubletalk", "change") is listed in allow_empty, in which case
    that row's three rates are defined to be 0 (a scenario with no change
    windows has, by convention, zero probability of declaring one).
    """
    bins = _pack_counts(run)

    denom_far = _sum_where(bins, x=1, v=0, c=0)
    denom_dbl = _sum_where(bins, x=1, v=1)
    denom_chg = _sum_where(bins, x=1, v=0, c=1) + _sum_where(bins, x=0, y=0, v=0, c=1)
    for denom, name, label in ((denom_far, "far", "far-only single-talk"),
                               (denom_dbl, "doubletalk", "doubletalk"),
                               (denom_chg, "change", "echo path change")):
        if denom == 0 and name not in allow_empty:
            raise EmptyConditionClassError(label)

    def row(denom, counts):
        if denom == 0:
            return 0.0, 0.0, 0.0
        return tuple(cnt / denom for cnt in counts)

    p_ff, p_fd, p_fc = row(denom_far, (
        _sum_where(bins, x=1, v=0, c=0, phi=0),
        _sum_where(bins, x=1, v=0, c=0, phi=1, eps=1),
        _sum_where(bins, x=1, v=0, c=0, phi=1, eps=0)))
    p_df, p_dd, p_dc = row(denom_dbl, (
        _sum_where(bins, x=1, v=1, phi=0),
        _sum_where(bins, x=1, v=1, phi=1, eps=1),
        _sum_where(bins, x=1, v=1, phi=1, eps=0)))
    p_cf, p_cd, p_cc = row(denom_chg, (
        _sum_where(bins, x=1, v=0, c=1, phi=0),
        _sum_where(bins, x=1, v=0, c=1, phi=1, eps=1),
        _sum_where(bins, x=1, v=0, c=1, phi=1, eps=0)))

    return ThreeClassProbs(
        p_ff=p_ff, p_fd=p_fd, p_fc=p_fc,
        p_df=p_df, p_dd=p_dd, p_dc=p_dc,
        p_cf=p_cf, p_cd=p_cd, p_cc=p_cc,
        denom_far=denom_far,
        denom_dbl=denom_dbl,
        denom_chg=denom_chg,
    )


def binary_roc(run: LabeledRun) -> BinaryRoc:
    """Classical two-class rates: p_f over the full record, p_m over doubletalk."""
    n = run.n_total
    if n == 0:
        raise ValueError("empty run")
    dbl = int(np.sum((run.x == 1) & (run.v == 1)))
    if dbl == 0:
        raise EmptyConditionClassError("doubletalk")
    p_f = int(np.sum((run.x == 1) & (run.phi == 1))) / n
    # miss count divided once, so the three-class doubletalk row reduces to
    # this value bit-exactly (1 - hits/dbl can differ in the last ulp)
    hits = int(np.sum((run.x == 1) & (run.v == 1) & (run.phi == 1)))
    return BinaryRoc(p_f=p_f, p_m=(dbl - hits) / dbl)


def reduce_p_false(probs: ThreeClassProbs) -> float:
    """Aggregate false-alarm rate of the three-class table: p_fd + p_cd."""
    return probs.p_fd + probs.p_cd


def reduce_p_miss(probs: ThreeClassProbs) -> float:
    """Aggregate miss rate of the three-class table: p_df + p_dc."""
    return probs.p_df + probs.p_dc


def _row_numerators(probs: ThreeClassProbs, row: str, denom: int):
    """Recover the integer numerators of a row from its stored rates.

    Each rate was produced by a single count/denominator division, so
    rounding rate * denominator restores the count exactly for any
    realistic run length.
    """
    return tuple(int(round(getattr(probs, f"p_{row}{col}") * denom))
                 for col in "fdc")


def normalization_residuals(probs: ThreeClassProbs, run: LabeledRun):
    """Row-sum residuals (far, doubletalk, change), computed on integer counts.

    All three are identically 0 for any valid run: the change-row rates sum
    to the far-active fraction of the change class, and that fraction is
    what the third residual is measured against. The gap to a full 1 is
    reported separately by change_row_shortfall.
    """
    residual_far = residual_dbl = residual_chg = 0.0
    if probs.denom_far:
        n = _row_numerators(probs, "f", probs.denom_far)
        residual_far = abs(sum(n) - probs.denom_far) / probs.denom_far
    if probs.denom_dbl:
        n = _row_numerators(probs, "d", probs.denom_dbl)
        residual_dbl = abs(sum(n) - probs.denom_dbl) / probs.denom_dbl
    if probs.denom_chg:
        n = _row_numerators(probs, "c", probs.denom_chg)
        far_active = int(np.sum((run.x == 1) & (run.v == 0) & (run.c == 1)))
        residual_chg = abs(sum(n) - far_active) / probs.denom_chg
    return residual_far, residual_dbl, residual_chg


def change_row_shortfall(probs: ThreeClassProbs) -> float:
    """How far the change row falls short of summing to 1.

    Equals (far-silent, echo-silent change samples) / change denominator;
    zero only when change windows contain no such samples. Computed from
    the recovered integer counts so the value is exact.
    """
    if not probs.denom_chg:
        return 0.0
    num = sum(_row_numerators(probs, "c", probs.denom_chg))
    return abs(num / probs.denom_chg - 1.0)


def misclass_vector(probs: ThreeClassProbs) -> tuple:
    """The six off-diagonal rates, ordered (p_fd, p_fc, p_df, p_dc, p_cf, p_cd)."""
    return (probs.p_fd, probs.p_fc, probs.p_df, probs.p_dc, probs.p_cf, probs.p_cd)

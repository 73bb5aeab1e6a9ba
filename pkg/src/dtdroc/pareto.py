"""Non-dominated archive over six-dimensional misclassification vectors.

Lower is better on every component. Insertion rejects a candidate that any
member weakly dominates (equal-or-better everywhere, ties included), and
evicts members the candidate strictly dominates; folding any point sequence
through insert therefore yields the unique maximal non-dominated set with
first-wins deduplication, independent of order.
"""

from dataclasses import dataclass, field

import numpy as np

from .rocprobs import ThreeClassProbs

STRICT = "strict"
WEAK = "weak"
NONE = "none"

RATE_NAMES = ("p_fd", "p_fc", "p_df", "p_dc", "p_cf", "p_cd")


@dataclass
class OperatingPoint:
    """A threshold pair and the six misclassification rates it produced."""

    t1: float
    rates: tuple
    t2: float = None
    probs: ThreeClassProbs = None
    label: str = ""

    def __post_init__(self):
        self.rates = tuple(float(r) for r in self.rates)
        if len(self.rates) != 6:
            raise ValueError("rates must have six components")
        if any(not 0.0 <= r <= 1.0 for r in self.rates):
            raise ValueError("rates must lie in [0, 1]")


def dominance(a, b) -> str:
    """Classify a against b: strict, weak (equal everywhere), or none."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("rate vectors must have equal length")
    if np.all(a <= b):
        return STRICT if np.any(a < b) else WEAK
    return NONE


class ParetoArchive:
    """Mutually non-dominating set of operating points."""

    def __init__(self, points=None):
        self.points: list = []
        for p in points or []:
            self.insert(p)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def rate_matrix(self) -> np.ndarray:
        if not self.points:
            return np.empty((0, 6))
        return np.array([p.rates for p in self.points])

    def insert(self, p: OperatingPoint) -> bool:
        """Insert p unless an existing member weakly dominates it.

        Members strictly dominated by p are evicted. Returns True when p
        was added.
        """
        rates = np.asarray(p.rates)
        if self.points:
            m = self.rate_matrix()
            if np.any(np.all(m <= rates, axis=1)):
                return False
            evict = np.all(rates <= m, axis=1) & np.any(rates < m, axis=1)
            if evict.any():
                self.points = [q for q, e in zip(self.points, evict) if not e]
        self.points.append(p)
        return True


def archive_insert(f: ParetoArchive, p: OperatingPoint) -> ParetoArchive:
    """Functional wrapper: insert into a copy, leaving f untouched."""
    out = ParetoArchive()
    out.points = list(f.points)
    out.insert(p)
    return out


def build_front(evaluate, t1_grid, t2_grid=None, label: str = "") -> ParetoArchive:
    """Sweep a threshold grid through the archive.

    evaluate(t1, t2) must return an OperatingPoint; t2 is None when no
    second-stage grid is given. The result is the exact non-dominated subset
    of every evaluated point.
    """
    t1s = list(t1_grid)
    if not t1s:
        raise ValueError("t1_grid is empty")
    t2s = list(t2_grid) if t2_grid is not None else [None]
    if not t2s:
        raise ValueError("t2_grid is empty")
    archive = ParetoArchive()
    for t1 in t1s:
        for t2 in t2s:
            p = evaluate(t1, t2)
            if label and not p.label:
                p.label = label
            archive.insert(p)
    return archive


def merge_fronts(f1: ParetoArchive, f2: ParetoArchive) -> ParetoArchive:
    """Non-dominated subset of the union; provenance labels are preserved."""
    merged = ParetoArchive()
    for p in list(f1.points) + list(f2.points):
        merged.insert(p)
    return merged


def band_filter(f: ParetoArchive, low: float, high: float) -> ParetoArchive:
    """Keep points whose tolerable rates (p_fd, p_fc, p_cf) lie in [low, high].

    A p_fc of exactly 0 (structural for detectors whose second stage never
    fires) is exempt from the lower bound.
    """
    out = ParetoArchive()
    for p in f.points:
        p_fd, p_fc, _, _, p_cf, _ = p.rates
        ok_fd = low <= p_fd <= high
        ok_cf = low <= p_cf <= high
        ok_fc = (low <= p_fc <= high) or (p_fc == 0.0 and p_fc <= high)
        if ok_fd and ok_fc and ok_cf:
            out.points.append(p)
    return out


def aggregate_px_py(p: OperatingPoint):
    """Equal-cost scalar projection of the six rates.

    px averages the tolerable errors (p_fd, p_fc, p_cf); py averages the
    costly ones (p_df, p_dc, p_cd).
    """
    p_fd, p_fc, p_df, p_dc, p_cf, p_cd = p.rates
    return (p_fd + p_fc + p_cf) / 3.0, (p_df + p_dc + p_cd) / 3.0


def project_front(f: ParetoArchive):
    """2-D non-dominated (px, py) projection of a front, sorted by px.

    The six-dimensional front can project onto 2-D dominated points; those
    are pruned so the result is a proper staircase.
    """
    pts = [(aggregate_px_py(p), p) for p in f.points]
    pts.sort(key=lambda t: (t[0][0], t[0][1]))
    out = []
    best_py = np.inf
    for (px, py), p in pts:
        if py < best_py:
            out.append((px, py, p))
            best_py = py
    return out


def py_at_px(projection, px_query: float) -> float:
    """Best achievable py at tolerable cost <= px_query; inf when uncovered."""
    best = np.inf
    for px, py, _ in projection:
        if px <= px_query and py < best:
            best = py
    return best

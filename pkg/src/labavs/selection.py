"""Three interchangeable rules for deciding local variable relevance.

Each rule looks at one query point, one bandwidth, and a threshold ``lam``
and partitions the dimensions into a relevant and a redundant set.  Scores
mean different things per rule (coefficient magnitudes for the hard
threshold and the lasso, relative fit-loss ratios for stepwise), so
thresholds are not interchangeable across rules.

Dimensions with no in-window variation are classified redundant up front
with a score of 0 and never enter the fitted design.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigurationError,
    ConvergenceError,
    DegenerateNeighborhoodError,
)
from .kernel import Bandwidth, kernel_weights
from .localreg import (
    Dataset,
    StandardizedNeighborhood,
    fit_local_linear,
    locally_constant_columns,
    standardize,
)

HARD_THRESHOLD = "hard_threshold"
STEPWISE = "stepwise"
LOCAL_LASSO = "local_lasso"
METHODS = (HARD_THRESHOLD, STEPWISE, LOCAL_LASSO)

_LASSO_TOL = 1e-9
_LASSO_MAX_SWEEPS = 10_000


@dataclass(frozen=True)
class SelectionConfig:
    """Which rule to run and at what threshold.

    ``lam`` must be nonnegative; 0 turns selection off (every non-degenerate
    dimension stays relevant) for all three rules.
    """

    method: str = HARD_THRESHOLD
    lam: float = 0.55

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(
                f"unknown selection method {self.method!r}; pick one of {METHODS}"
            )
        if not (self.lam >= 0.0) or not np.isfinite(self.lam):
            raise ConfigurationError(f"lambda must be a finite nonnegative real, "
                                     f"got {self.lam}")


@dataclass(frozen=True)
class SelectionResult:
    """Partition of the dimensions at one query point.

    ``relevant`` and ``redundant`` are disjoint and cover ``range(d)``;
    ``scores`` holds one value per dimension on the rule's own scale.
    """

    relevant: frozenset
    redundant: frozenset
    scores: np.ndarray = field(repr=False)

    @property
    def d(self) -> int:
        return self.scores.shape[0]


def _partition(redundant_mask, scores) -> SelectionResult:
    idx = np.arange(scores.shape[0])
    red = frozenset(int(j) for j in idx[redundant_mask])
    rel = frozenset(int(j) for j in idx[~redundant_mask])
    return SelectionResult(rel, red, np.asarray(scores, dtype=float))


# ---------------------------------------------------------------------------
# hard threshold
# ---------------------------------------------------------------------------

def select_hard_threshold(nbhd: StandardizedNeighborhood, lam: float) -> SelectionResult:
    """Keep dimensions whose standardized coefficient magnitude reaches ``lam``.

    An unweighted least-squares fit of ``ytilde`` on ``xtilde`` plus an
    intercept (the kernel weights are already embedded in the standardized
    data); dimension ``j`` is redundant iff ``|beta_j| < lam``.
    """
    if lam < 0.0:
        raise ConfigurationError(f"lambda must be nonnegative, got {lam}")
    d = nbhd.xtilde.shape[1]
    deg = nbhd.degenerate
    live = np.flatnonzero(~deg)
    scores = np.zeros(d)
    if live.size:
        n = nbhd.xtilde.shape[0]
        design = np.empty((n, live.size + 1))
        design[:, 0] = 1.0
        design[:, 1:] = nbhd.xtilde[:, live]
        coef, _, rank, _ = np.linalg.lstsq(design, nbhd.ytilde, rcond=None)
        if rank < design.shape[1]:
            raise DegenerateNeighborhoodError(
                "standardized design is rank deficient",
                n_in_window=nbhd.n_in_window,
            )
        scores[live] = np.abs(coef[1:])
    redundant = deg | (scores < lam)
    return _partition(redundant, scores)


# ---------------------------------------------------------------------------
# single-pass backwards stepwise
# ---------------------------------------------------------------------------

def _is_zero_rss(rss, w, y):
    ref = float(np.sum(w * y * y))
    return rss <= 1e-18 * max(ref, 1.0)


def select_stepwise(data: Dataset, x_query, bw: Bandwidth, lam: float) -> SelectionResult:
    """Drop dimensions whose removal barely hurts the weighted fit.

    One pass: fit the full local linear model, then refit leaving each
    dimension out in turn.  The score of dimension ``j`` is
    ``(rss_without_j - rss_full) / rss_full``; ``j`` is redundant iff the
    score is below ``lam``.  When the full fit is exact (zero residual) the
    ratio is ``+inf`` except where the reduced fit is also exact, which
    scores 0.
    """
    if lam < 0.0:
        raise ConfigurationError(f"lambda must be nonnegative, got {lam}")
    q = np.asarray(x_query, dtype=float)
    w = kernel_weights(q, data.x, bw, normalized=False)
    sw = float(np.sum(w))
    n_in = int(np.count_nonzero(w > 0.0))
    if n_in < 1 or sw <= 0.0:
        raise DegenerateNeighborhoodError(
            "no observations carry positive weight", n_in_window=n_in
        )
    xbar = (w @ data.x) / sw
    deg = locally_constant_columns(data.x, w, xbar)
    live = np.flatnonzero(~deg)
    scores = np.zeros(data.d)
    if live.size:
        full = fit_local_linear(data, q, bw, active=live)
        full_zero = _is_zero_rss(full.rss, w, data.y)
        for j in live:
            others = live[live != j]
            part = fit_local_linear(data, q, bw, active=others)
            if full_zero:
                scores[j] = 0.0 if _is_zero_rss(part.rss, w, data.y) else np.inf
            else:
                # Nested models: the ratio is nonnegative up to rounding.
                scores[j] = max(0.0, (part.rss - full.rss) / full.rss)
    redundant = np.ones(data.d, dtype=bool)
    redundant[live] = scores[live] < lam
    return _partition(redundant, scores)


# ---------------------------------------------------------------------------
# local lasso by cyclic coordinate descent
# ---------------------------------------------------------------------------

def _lasso_duality_gap(design, y, coef, intercept, lam):
    resid = y - intercept - design @ coef
    primal = float(resid @ resid + lam * np.sum(np.abs(coef)))
    corr = design.T @ resid
    big = float(np.max(np.abs(corr))) if corr.size else 0.0
    theta = resid if big <= lam / 2.0 or big == 0.0 else resid * (lam / (2.0 * big))
    yc = y - intercept
    dual = float(yc @ yc - (yc - theta) @ (yc - theta))
    return primal - dual


def select_local_lasso(nbhd: StandardizedNeighborhood, lam: float) -> SelectionResult:
    """L1-penalized fit on the standardized neighborhood; zeros are redundant.

    Minimizes ``sum (ytilde - g0 - xtilde @ g)^2 + lam * sum |g_j|`` with an
    unpenalized intercept by cyclic coordinate descent with soft
    thresholding.  Columns of ``xtilde`` have unit sum of squares, so each
    coordinate update is a single soft threshold.  Convergence is declared
    when no coefficient moves more than 1e-9 in a sweep.

    Raises
    ------
    ConvergenceError
        After 10,000 sweeps without meeting the tolerance; carries the
        final duality gap.
    """
    if lam < 0.0:
        raise ConfigurationError(f"lambda must be nonnegative, got {lam}")
    d = nbhd.xtilde.shape[1]
    deg = nbhd.degenerate
    live = np.flatnonzero(~deg)
    scores = np.zeros(d)
    coef_full = np.zeros(d)
    if live.size:
        design = nbhd.xtilde[:, live]
        y = nbhd.ytilde
        coef = np.zeros(live.size)
        intercept = float(np.mean(y))
        resid = y - intercept
        thresh = lam / 2.0
        for _ in range(_LASSO_MAX_SWEEPS):
            delta = 0.0
            for k in range(live.size):
                old = coef[k]
                rho = float(design[:, k] @ resid) + old
                new = np.sign(rho) * max(abs(rho) - thresh, 0.0)
                if new != old:
                    resid -= (new - old) * design[:, k]
                    coef[k] = new
                    delta = max(delta, abs(new - old))
            new_intercept = intercept + float(np.mean(resid))
            if new_intercept != intercept:
                delta = max(delta, abs(new_intercept - intercept))
                resid -= new_intercept - intercept
                intercept = new_intercept
            if delta < _LASSO_TOL:
                break
        else:
            gap = _lasso_duality_gap(design, y, coef, intercept, lam)
            raise ConvergenceError(
                f"coordinate descent did not converge in {_LASSO_MAX_SWEEPS} sweeps",
                gap=gap,
            )
        coef_full[live] = coef
        scores[live] = np.abs(coef)
    redundant = np.ones(d, dtype=bool)
    redundant[live] = coef_full[live] == 0.0
    return _partition(redundant, scores)


# ---------------------------------------------------------------------------
# dispatcher
# ---------------------------------------------------------------------------

def select_at(data: Dataset, x_query, bw: Bandwidth, config: SelectionConfig) -> SelectionResult:
    """Run the configured rule at one query point."""
    if config.method == STEPWISE:
        return select_stepwise(data, x_query, bw, config.lam)
    nbhd = standardize(data, x_query, bw)
    if config.method == HARD_THRESHOLD:
        return select_hard_threshold(nbhd, config.lam)
    return select_local_lasso(nbhd, config.lam)

"""Weighted local polynomial fitting and the supporting data structures.

Everything here is pointwise: a fit happens at one query location with one
bandwidth.  The design is always centered at the query, so the intercept of
a local linear fit is the regression estimate at that point.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateNeighborhoodError,
    DimensionMismatchError,
)
from .kernel import Bandwidth, kernel_weights

# Condition estimate above which the normal-equation route is abandoned in
# favor of a rank-revealing orthogonal solve.
_COND_LIMIT = 1e10

# A column is locally constant when its in-window spread is below this,
# relative to the magnitude of its weighted mean.
_CONST_RTOL = 1e-13


@dataclass(frozen=True)
class Dataset:
    """Immutable predictor matrix plus response vector.

    Parameters
    ----------
    x : (n, d) ndarray
    y : (n,) ndarray
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        xa = np.asarray(self.x, dtype=float)
        ya = np.asarray(self.y, dtype=float)
        if xa.ndim != 2:
            raise ConfigurationError("predictors must form a 2-D array")
        if ya.ndim != 1:
            raise ConfigurationError("response must be a 1-D array")
        if xa.shape[0] != ya.shape[0]:
            raise DimensionMismatchError(
                f"{xa.shape[0]} predictor rows, {ya.shape[0]} responses"
            )
        if xa.shape[0] < 1 or xa.shape[1] < 1:
            raise ConfigurationError("dataset needs at least one row and column")
        if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(ya))):
            raise ConfigurationError("dataset contains NaN or infinite entries")
        object.__setattr__(self, "x", xa)
        object.__setattr__(self, "y", ya)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class LocalFit:
    """Result of one weighted local fit.

    ``slopes`` always has one entry per dataset dimension; dimensions that
    were not in the active set carry an exact zero.
    """

    intercept: float
    slopes: np.ndarray
    effective_weight_sum: float
    rss: float

    @property
    def estimate(self) -> float:
        """The fitted value at the query point (the design is centered)."""
        return self.intercept


@dataclass(frozen=True)
class StandardizedNeighborhood:
    """Locally standardized copy of the data around one query point.

    ``xtilde`` columns are centered at the kernel-weighted mean, multiplied
    by the square root of the weight and scaled so each column's sum of
    squares is 1.  ``ytilde`` is centered and weight-scaled but not
    rescaled.  A column with no in-window variation gets ``scale`` 0 and an
    all-zero ``xtilde`` column; such dimensions are redundant by convention.
    """

    xtilde: np.ndarray
    ytilde: np.ndarray
    xbar: np.ndarray
    ybar: float
    scale: np.ndarray
    n_in_window: int = field(default=0)

    @property
    def degenerate(self) -> np.ndarray:
        """Boolean mask of columns with zero in-window variation."""
        return self.scale == 0.0


# ---------------------------------------------------------------------------
# solvers
# ---------------------------------------------------------------------------

def _solve_wls(design, y, w, n_in):
    """Solve min ||sqrt(w) (y - design @ beta)||^2.

    Normal equations with a Cholesky factorization, falling back to a
    rank-revealing least-squares solve when the condition estimate is past
    _COND_LIMIT or the factorization fails.  Rank deficiency raises a
    degenerate-neighborhood error carrying the in-window count.
    """
    m = design.shape[1]
    sw = np.sqrt(w)
    a = design * sw[:, None]
    g = a.T @ a
    c = a.T @ (y * sw)
    try:
        cond = np.linalg.cond(g)
    except np.linalg.LinAlgError:
        cond = np.inf
    if np.isfinite(cond) and cond <= _COND_LIMIT:
        try:
            chol = np.linalg.cholesky(g)
            z = np.linalg.solve(chol, c)
            return np.linalg.solve(chol.T, z)
        except np.linalg.LinAlgError:
            pass
    coef, _, rank, _ = np.linalg.lstsq(a, y * sw, rcond=None)
    if rank < m:
        raise DegenerateNeighborhoodError(
            "local design is rank deficient", n_in_window=n_in
        )
    return coef


def _window_weights(data: Dataset, x_query, bw: Bandwidth):
    q = np.asarray(x_query, dtype=float)
    if q.ndim != 1 or q.shape[0] != data.d:
        raise DimensionMismatchError(
            f"query has {np.ndim(x_query)}-D shape {np.shape(x_query)}, "
            f"data has {data.d} dimensions"
        )
    w = kernel_weights(q, data.x, bw)
    return q, w, int(np.count_nonzero(w > 0.0))


# ---------------------------------------------------------------------------
# local fits
# ---------------------------------------------------------------------------

def fit_local_linear(data: Dataset, x_query, bw: Bandwidth, active=None) -> LocalFit:
    """Weighted local linear fit at ``x_query``.

    Parameters
    ----------
    data : Dataset
    x_query : (d,) array_like
    bw : Bandwidth
        Half-widths for all ``d`` dimensions (also the excluded ones; they
        still shape the weights).
    active : sequence of int, optional
        Dimensions that get slope terms.  Defaults to all of them.  An
        empty sequence is allowed and reduces to a weighted mean.

    Raises
    ------
    DegenerateNeighborhoodError
        Fewer than ``len(active) + 1`` points carry positive weight, or the
        weighted design is rank deficient.
    """
    if active is None:
        active = np.arange(data.d)
    else:
        active = np.asarray(sorted(set(int(j) for j in active)), dtype=int)
        if active.size and (active[0] < 0 or active[-1] >= data.d):
            raise ConfigurationError(f"active set {active} out of range")
    q, w, n_in = _window_weights(data, x_query, bw)
    m = active.size + 1
    if n_in < m:
        raise DegenerateNeighborhoodError(
            f"need at least {m} in-window points for a local linear fit",
            n_in_window=n_in,
        )
    design = np.empty((data.n, m))
    design[:, 0] = 1.0
    design[:, 1:] = data.x[:, active] - q[active]
    coef = _solve_wls(design, data.y, w, n_in)
    slopes = np.zeros(data.d)
    slopes[active] = coef[1:]
    resid = data.y - design @ coef
    rss = float(np.sum(w * resid * resid))
    return LocalFit(float(coef[0]), slopes, float(np.sum(w)), rss)


def fit_local_constant(data: Dataset, x_query, bw: Bandwidth) -> LocalFit:
    """Kernel-weighted mean of the response at ``x_query``."""
    q, w, n_in = _window_weights(data, x_query, bw)
    sw = float(np.sum(w))
    if n_in < 1 or sw <= 0.0:
        raise DegenerateNeighborhoodError(
            "no observations carry positive weight", n_in_window=n_in
        )
    mean = float(np.dot(w, data.y) / sw)
    resid = data.y - mean
    rss = float(np.sum(w * resid * resid))
    return LocalFit(mean, np.zeros(data.d), sw, rss)


# ---------------------------------------------------------------------------
# standardization
# ---------------------------------------------------------------------------

def locally_constant_columns(x, w, xbar):
    """Mask of columns whose in-window values are numerically constant."""
    inside = w > 0.0
    if not np.any(inside):
        return np.ones(x.shape[1], dtype=bool)
    spread = np.max(np.abs(x[inside] - xbar), axis=0)
    return spread <= _CONST_RTOL * np.maximum(1.0, np.abs(xbar))


def standardize(data: Dataset, x_query, bw: Bandwidth) -> StandardizedNeighborhood:
    """Standardize the neighborhood of ``x_query`` for scale-free selection.

    Weights here are unnormalized tricube products (no 1/h factors), which
    keeps the magnitude of regression coefficients on the standardized data
    comparable across bandwidths and dimension counts; see ``kernel_weights``.

    Raises
    ------
    DegenerateNeighborhoodError
        If no observation carries positive weight.
    """
    q = np.asarray(x_query, dtype=float)
    if q.ndim != 1 or q.shape[0] != data.d:
        raise DimensionMismatchError(
            f"query has shape {np.shape(x_query)}, data has {data.d} dimensions"
        )
    w = kernel_weights(q, data.x, bw, normalized=False)
    n_in = int(np.count_nonzero(w > 0.0))
    sw = float(np.sum(w))
    if n_in < 1 or sw <= 0.0:
        raise DegenerateNeighborhoodError(
            "no observations carry positive weight", n_in_window=n_in
        )
    xbar = (w @ data.x) / sw
    ybar = float(np.dot(w, data.y) / sw)
    sqw = np.sqrt(w)
    centered = data.x - xbar
    const = locally_constant_columns(data.x, w, xbar)
    ss = np.sum(w[:, None] * centered * centered, axis=0)
    scale = np.where(const, 0.0, np.sqrt(np.where(const, 1.0, ss)))
    xtilde = np.where(const, 0.0, centered * sqw[:, None]
                      / np.where(const, 1.0, scale))
    ytilde = (data.y - ybar) * sqw
    return StandardizedNeighborhood(xtilde, ytilde, xbar, ybar, scale, n_in)


# ---------------------------------------------------------------------------
# bandwidth from nearest neighbours
# ---------------------------------------------------------------------------

def nn_bandwidth(data: Dataset, x_query, frac: float) -> Bandwidth:
    """Symmetric bandwidth from the k-th nearest neighbour in sup distance.

    ``k = ceil(frac * n)``; the half-width is the smallest value (up to a
    one-part-in-1e9 bump that keeps the boundary point strictly interior)
    that puts at least ``k`` observations at strictly positive weight.  The
    result is shared by every dimension and is monotone in ``frac``.

    Raises
    ------
    ConfigurationError
        ``frac`` outside (0, 1], or ``k < d + 2`` so that a local linear
        fit could never be identified.
    """
    if not (0.0 < frac <= 1.0):
        raise ConfigurationError(f"nearest-neighbour fraction {frac} not in (0, 1]")
    k = int(np.ceil(frac * data.n))
    if k < data.d + 2:
        raise ConfigurationError(
            f"frac {frac} keeps only {k} neighbours; need at least d + 2 = "
            f"{data.d + 2}"
        )
    q = np.asarray(x_query, dtype=float)
    if q.ndim != 1 or q.shape[0] != data.d:
        raise DimensionMismatchError(
            f"query has shape {np.shape(x_query)}, data has {data.d} dimensions"
        )
    dist = np.max(np.abs(data.x - q), axis=1)
    kth = float(np.partition(dist, k - 1)[k - 1])
    h = kth * (1.0 + 1e-9)
    if h <= 0.0:
        # Duplicates of the query itself; any positive width admits them.
        spread = float(np.max(data.x) - np.min(data.x)) if data.n > 1 else 0.0
        h = 1e-12 * max(1.0, spread)
    return Bandwidth.symmetric(h, data.d)


def local_linear_predict(data: Dataset, x_query, bw_or_frac) -> float:
    """Plain local linear estimate, the baseline the adaptive fit reduces to.

    ``bw_or_frac`` is either a Bandwidth or a nearest-neighbour fraction.
    """
    if isinstance(bw_or_frac, Bandwidth):
        bw = bw_or_frac
    else:
        bw = nn_bandwidth(data, x_query, float(bw_or_frac))
    return fit_local_linear(data, x_query, bw).estimate

"""The adaptive-bandwidth pipeline: classify, expand, shrink, predict.

The fitted object is a grid over the data's bounding box.  Each grid point
carries a locally selected relevant set and an asymmetric bandwidth: half-
widths of redundant dimensions are grown (to infinity when nothing stops
them before the edge of the data) and half-widths of relevant dimensions
are shrunk to spend the freed smoothing budget where it matters.
Predictions at arbitrary points borrow the stored geometry of the nearest
grid point and refit locally there.
"""

import hashlib
import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    ConfigurationError,
    DegenerateGridError,
    DegenerateNeighborhoodError,
    DimensionMismatchError,
    ParseError,
)
from .kernel import Bandwidth, kernel_weights
from .localreg import Dataset, fit_local_constant, fit_local_linear, nn_bandwidth
from .selection import SelectionConfig, select_at

DEFAULT_LAMBDA = 0.55
DEFAULT_NN_FRAC = 0.2

REDUCED = "reduced"
FULL = "full"
FINAL_FIT_MODES = (REDUCED, FULL)

LOCAL = "local"
GLOBAL = "global"
SHRINK_MODES = (LOCAL, GLOBAL)

MODEL_SCHEMA = "labavs-model"
MODEL_SCHEMA_VERSION = 1

_MAX_GRID_POINTS = 1_000_000
_MAX_WIDEN = 40
# Interior tolerance, relative to the lattice pitch: grid planes within this
# sliver of the window edge carry ~zero weight and count as outside.
_EDGE_RTOL = 1e-9


@dataclass(frozen=True)
class BandwidthSpec:
    """Initial-bandwidth rule: one fixed half-width, or a neighbour fraction."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("fixed", "nn"):
            raise ConfigurationError(f"unknown bandwidth kind {self.kind!r}")
        if self.kind == "fixed" and not (0.0 < self.value < np.inf):
            raise ConfigurationError(
                f"fixed half-width must be positive and finite, got {self.value}"
            )
        if self.kind == "nn" and not (0.0 < self.value <= 1.0):
            raise ConfigurationError(
                f"nearest-neighbour fraction {self.value} not in (0, 1]"
            )

    @classmethod
    def fixed(cls, h: float) -> "BandwidthSpec":
        return cls("fixed", float(h))

    @classmethod
    def nearest_neighbor(cls, frac: float) -> "BandwidthSpec":
        return cls("nn", float(frac))


@dataclass(frozen=True)
class Grid:
    """Regular lattice over the data's bounding box, inclusive of both ends.

    ``axes`` holds the sorted plane coordinates per dimension; ``spacing``
    is the requested upper bound on the pitch (the realized per-dimension
    pitch never exceeds it).
    """

    axes: tuple
    spacing: float
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        if not axes or any(a.ndim != 1 or a.size < 1 for a in axes):
            raise ConfigurationError("grid axes must be nonempty 1-D arrays")
        object.__setattr__(self, "axes", axes)
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack(mesh, axis=-1).reshape(-1, len(axes))
        object.__setattr__(self, "points", pts)

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(a.size for a in self.axes)

    @property
    def n_points(self) -> int:
        return int(np.prod(self.shape))

    def pitch(self, j: int) -> float:
        a = self.axes[j]
        return float(a[1] - a[0]) if a.size > 1 else float(self.spacing)

    def nearest_index(self, x) -> int:
        """Flat index of the closest grid point; ties go to the smaller
        coordinate in each dimension (lexicographic)."""
        q = np.asarray(x, dtype=float)
        if q.ndim != 1 or q.shape[0] != self.d:
            raise DimensionMismatchError(
                f"query has shape {np.shape(x)}, grid has {self.d} dimensions"
            )
        multi = []
        for j, a in enumerate(self.axes):
            pos = int(np.searchsorted(a, q[j]))
            if pos <= 0:
                multi.append(0)
            elif pos >= a.size:
                multi.append(a.size - 1)
            else:
                below, above = q[j] - a[pos - 1], a[pos] - q[j]
                multi.append(pos - 1 if below <= above else pos)
        return int(np.ravel_multi_index(tuple(multi), self.shape))


def build_grid(data: Dataset, spacing: float) -> Grid:
    """Lay a lattice with pitch at most ``spacing`` over the data's box.

    Raises
    ------
    ConfigurationError
        Nonpositive spacing.
    DegenerateGridError
        A dimension has zero range, or the lattice would be absurdly large.
    """
    if not (spacing > 0.0) or not np.isfinite(spacing):
        raise ConfigurationError(f"grid spacing must be positive, got {spacing}")
    lo = data.x.min(axis=0)
    hi = data.x.max(axis=0)
    axes = []
    total = 1
    for j in range(data.d):
        rng = hi[j] - lo[j]
        if rng <= 0.0:
            raise DegenerateGridError(
                f"dimension {j} has zero range [{lo[j]}, {hi[j]}]"
            )
        segments = max(1, int(np.ceil(rng / spacing - 1e-9)))
        total *= segments + 1
        if total > _MAX_GRID_POINTS:
            raise DegenerateGridError(
                f"grid would exceed {_MAX_GRID_POINTS} points; "
                f"pass a coarser spacing"
            )
        axes.append(np.linspace(lo[j], hi[j], segments + 1))
    return Grid(tuple(axes), float(spacing))


# ---------------------------------------------------------------------------
# variance factor
# ---------------------------------------------------------------------------

def variance_factor(data: Dataset, x_query, bw: Bandwidth) -> float:
    """Sum of squared kernel weights over the squared weight sum.

    Equals ``1/k`` for ``k`` equal-weight in-window points and grows as the
    weight mass concentrates; it proxies the variance of a local constant
    estimate and drives bandwidth shrinkage.
    """
    q = np.asarray(x_query, dtype=float)
    w = kernel_weights(q, data.x, bw)
    s1 = float(np.sum(w))
    if s1 <= 0.0:
        raise DegenerateNeighborhoodError(
            "no observations carry positive weight", n_in_window=0
        )
    s2 = float(np.sum(w * w))
    return s2 / (s1 * s1)


def shrink_halfwidth(h: float, d: int, d_prime: int, v_initial: float,
                     v_expanded: float) -> float:
    """Shrunken half-width for the relevant dimensions at one grid point.

    The expanded window usually spreads weight over more points, dropping
    the variance factor by ``v_expanded / v_initial``; that slack is traded
    for a tighter window on the ``d_prime`` surviving dimensions.  Never
    exceeds the initial ``h``.
    """
    if d_prime < 1:
        raise ConfigurationError("shrinkage needs at least one relevant dimension")
    ratio = (v_expanded / v_initial) * d_prime / d
    return min(h, h * ratio ** (1.0 / (d_prime + 4)))


# ---------------------------------------------------------------------------
# rectangle expansion
# ---------------------------------------------------------------------------

class _Expander:
    """Grows per-grid-point windows along redundant dimensions.

    Growth proceeds round-robin over the open directions in steps of the
    lattice pitch.  A direction freezes as soon as one step would newly
    admit a grid point whose relevant set is not contained in the point's
    own; a step that would carry the edge past the data's bounding box
    promotes the half-width to infinity instead (provided the infinite
    window admits nothing bad either).  Bad points already inside the
    initial window do not block growth; only newly admitted ones do.
    """

    def __init__(self, grid: Grid, relevant_mask: np.ndarray):
        self.grid = grid
        self.d = grid.d
        mask = np.asarray(relevant_mask, dtype=bool)
        if mask.shape != (grid.n_points, grid.d):
            raise DimensionMismatchError(
                f"mask shape {mask.shape} does not match grid "
                f"{(grid.n_points, grid.d)}"
            )
        self.mask = mask
        bits = 1 << np.arange(self.d, dtype=np.int64)
        self.packed = (mask.astype(np.int64) * bits).sum(axis=1)
        self.pitches = np.array([grid.pitch(j) for j in range(self.d)])
        self.lo = np.array([a[0] for a in grid.axes])
        self.hi = np.array([a[-1] for a in grid.axes])
        self._sats = {}

    def _sat(self, vmask: int) -> np.ndarray:
        sat = self._sats.get(vmask)
        if sat is None:
            bad = (self.packed & ~vmask) != 0
            cum = bad.reshape(self.grid.shape).astype(np.int64)
            for ax in range(self.d):
                cum = np.cumsum(cum, axis=ax)
            sat = np.pad(cum, [(1, 0)] * self.d)
            self._sats[vmask] = sat
        return sat

    def _count_bad(self, sat, lo_idx, hi_idx) -> int:
        total = 0
        for corner in itertools.product((0, 1), repeat=self.d):
            idx = tuple(hi_idx[k] + 1 if corner[k] else lo_idx[k]
                        for k in range(self.d))
            sign = -1 if (self.d - sum(corner)) % 2 else 1
            total += sign * int(sat[idx])
        return total

    def _index_box(self, g, lower, upper):
        lo_idx, hi_idx = [], []
        for k in range(self.d):
            a = self.grid.axes[k]
            eps = _EDGE_RTOL * self.pitches[k]
            if np.isinf(lower[k]):
                lo_idx.append(0)
            else:
                lo_idx.append(int(np.searchsorted(a, g[k] - lower[k] + eps,
                                                  side="left")))
            if np.isinf(upper[k]):
                hi_idx.append(a.size - 1)
            else:
                hi_idx.append(int(np.searchsorted(a, g[k] + upper[k] - eps,
                                                  side="right")) - 1)
        return lo_idx, hi_idx

    def expand(self, flat_index: int, h: float):
        """Expanded (lower, upper) half-width arrays for one grid point."""
        g = self.grid.points[flat_index]
        vmask = int(self.packed[flat_index])
        lower = np.full(self.d, float(h))
        upper = np.full(self.d, float(h))
        open_dirs = [(j, side) for j in range(self.d)
                     if not self.mask[flat_index, j] for side in (0, 1)]
        if not open_dirs:
            return lower, upper
        sat = self._sat(vmask)
        cur_bad = self._count_bad(sat, *self._index_box(g, lower, upper))
        while open_dirs:
            keep = []
            for j, side in open_dirs:
                arr = lower if side == 0 else upper
                old = arr[j]
                cand = old + self.pitches[j]
                eps = _EDGE_RTOL * self.pitches[j]
                if side == 0:
                    promote = g[j] - cand <= self.lo[j] + eps
                else:
                    promote = g[j] + cand >= self.hi[j] - eps
                arr[j] = np.inf if promote else cand
                n_bad = self._count_bad(sat, *self._index_box(g, lower, upper))
                if n_bad > cur_bad:
                    arr[j] = old  # freeze this direction
                elif not promote:
                    keep.append((j, side))
            open_dirs = keep
        return lower, upper


def expand_rectangle(grid: Grid, relevant_mask, flat_index: int,
                     h: float) -> Bandwidth:
    """One-shot window expansion at a single grid point (see _Expander)."""
    lower, upper = _Expander(grid, relevant_mask).expand(int(flat_index), h)
    return Bandwidth(lower, upper)


# ---------------------------------------------------------------------------
# fitted model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignificanceGrid:
    """Per-grid-point selection results and adjusted window geometry."""

    grid: Grid
    relevant_mask: np.ndarray
    initial_halfwidths: np.ndarray
    adjusted_lower: np.ndarray
    adjusted_upper: np.ndarray
    degenerate_fallbacks: int = 0

    @property
    def d_prime(self) -> np.ndarray:
        """Number of relevant dimensions at each grid point."""
        return self.relevant_mask.sum(axis=1)

    def relevant_set(self, flat_index: int) -> frozenset:
        return frozenset(int(j) for j in
                         np.flatnonzero(self.relevant_mask[flat_index]))


def relevant_set_label(indices) -> str:
    """Canonical 1-based display string for a relevant set, e.g. ``{1,2}``."""
    return "{" + ",".join(str(int(j) + 1) for j in sorted(indices)) + "}"


@dataclass(frozen=True)
class LabavsModel:
    """Everything needed to predict: data, geometry, and the fit recipe."""

    data: Dataset
    config: SelectionConfig
    bw_spec: BandwidthSpec
    final_fit_mode: str
    shrink_mode: str
    sig: SignificanceGrid

    @property
    def d(self) -> int:
        return self.data.d

    def predict(self, x_query) -> float:
        return predict(self, x_query)

    def predict_many(self, x) -> np.ndarray:
        xa = np.atleast_2d(np.asarray(x, dtype=float))
        return np.array([predict(self, row) for row in xa])

    def relevance_fractions(self) -> np.ndarray:
        """Share of grid points at which each dimension is relevant."""
        return self.sig.relevant_mask.mean(axis=0)

    def globally_removed_dimensions(self) -> frozenset:
        """Dimensions judged redundant at every grid point.

        Such a dimension never enters a reduced final fit anywhere in the
        domain, so it has been removed from the model completely.  Its
        window is still widened (often to infinity) pointwise, but removal
        is a statement about the selection, not about the widths.
        """
        nowhere_relevant = ~self.sig.relevant_mask.any(axis=0)
        return frozenset(int(j) for j in np.flatnonzero(nowhere_relevant))

    def pattern_counts(self):
        """Distinct relevant-set patterns with grid-point counts, by
        decreasing frequency then label."""
        counts = {}
        for i in range(self.sig.grid.n_points):
            label = relevant_set_label(self.sig.relevant_set(i))
            counts[label] = counts.get(label, 0) + 1
        return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

def _nn_radii(points, data: Dataset, frac: float) -> np.ndarray:
    """Vectorized nearest-neighbour half-widths at many query points."""
    k = int(np.ceil(frac * data.n))
    if k < data.d + 2:
        raise ConfigurationError(
            f"frac {frac} keeps only {k} neighbours; need at least d + 2 = "
            f"{data.d + 2}"
        )
    dist = cdist(points, data.x, metric="chebyshev")
    kth = np.partition(dist, k - 1, axis=1)[:, k - 1]
    h = kth * (1.0 + 1e-9)
    if np.any(h <= 0.0):
        spread = float(np.max(data.x) - np.min(data.x)) if data.n > 1 else 0.0
        h = np.maximum(h, 1e-12 * max(1.0, spread))
    return h


def _initial_halfwidths(grid: Grid, data: Dataset, bw_spec: BandwidthSpec):
    if bw_spec.kind == "fixed":
        return np.full(grid.n_points, bw_spec.value)
    return _nn_radii(grid.points, data, bw_spec.value)


def _classify(data: Dataset, config: SelectionConfig, grid: Grid, h_arr):
    n_pts = grid.n_points
    mask = np.zeros((n_pts, data.d), dtype=bool)
    failed = []
    for i in range(n_pts):
        bw = Bandwidth.symmetric(h_arr[i], data.d)
        try:
            res = select_at(data, grid.points[i], bw, config)
        except DegenerateNeighborhoodError:
            failed.append(i)
            continue
        for j in res.relevant:
            mask[i, j] = True
    if len(failed) == n_pts:
        raise DegenerateNeighborhoodError(
            "every grid point has a degenerate neighborhood", n_in_window=0
        )
    if failed:
        ok = np.setdiff1d(np.arange(n_pts), np.asarray(failed))
        for i in failed:
            delta = grid.points[ok] - grid.points[i]
            j = ok[int(np.argmin(np.einsum("ij,ij->i", delta, delta)))]
            mask[i] = mask[j]
    return mask, len(failed)


def fit(data: Dataset, config: SelectionConfig | None = None,
        bw_spec: BandwidthSpec | None = None, spacing: float | None = None,
        final_fit_mode: str = REDUCED, shrink_mode: str = LOCAL) -> LabavsModel:
    """Run the full pipeline and return a ready-to-predict model.

    Parameters
    ----------
    data : Dataset
    config : SelectionConfig, optional
        Defaults to the hard threshold at ``DEFAULT_LAMBDA``.
    bw_spec : BandwidthSpec, optional
        Defaults to nearest-neighbour windows at ``DEFAULT_NN_FRAC``.
    spacing : float, optional
        Grid pitch bound.  Must stay below the smallest initial half-width
        so every observation falls inside some grid point's window; the
        default picks half of that smallest half-width.
    final_fit_mode : {"reduced", "full"}
        Reduced drops redundant dimensions from the prediction design;
        full keeps every dimension and relies on the adjusted windows.
    shrink_mode : {"local", "global"}
        Local shrinks each grid point by its own variance-factor ratio;
        global applies one grid-averaged factor everywhere.
    """
    if config is None:
        config = SelectionConfig(lam=DEFAULT_LAMBDA)
    if bw_spec is None:
        bw_spec = BandwidthSpec.nearest_neighbor(DEFAULT_NN_FRAC)
    if final_fit_mode not in FINAL_FIT_MODES:
        raise ConfigurationError(
            f"final_fit_mode must be one of {FINAL_FIT_MODES}, "
            f"got {final_fit_mode!r}"
        )
    if shrink_mode not in SHRINK_MODES:
        raise ConfigurationError(
            f"shrink_mode must be one of {SHRINK_MODES}, got {shrink_mode!r}"
        )

    explicit_spacing = spacing is not None
    if explicit_spacing:
        if not (spacing > 0.0) or not np.isfinite(spacing):
            raise ConfigurationError(f"spacing must be positive, got {spacing}")
    elif bw_spec.kind == "fixed":
        spacing = bw_spec.value / 2.0
    else:
        spacing = float(np.min(_nn_radii(data.x, data, bw_spec.value))) / 2.0

    grid = build_grid(data, spacing)
    h_arr = _initial_halfwidths(grid, data, bw_spec)
    if not explicit_spacing and spacing >= np.min(h_arr):
        # Rare: a grid point sits in a sparser spot than any observation.
        spacing = float(np.min(h_arr)) / 2.0
        grid = build_grid(data, spacing)
        h_arr = _initial_halfwidths(grid, data, bw_spec)
    if spacing >= np.min(h_arr):
        raise ConfigurationError(
            f"spacing {spacing} must be below the smallest initial "
            f"half-width {np.min(h_arr):.6g}"
        )

    mask, n_fallback = _classify(data, config, grid, h_arr)

    expander = _Expander(grid, mask)
    n_pts = grid.n_points
    lower = np.empty((n_pts, data.d))
    upper = np.empty((n_pts, data.d))
    for i in range(n_pts):
        lower[i], upper[i] = expander.expand(i, h_arr[i])

    d_prime = mask.sum(axis=1)
    v_init = np.ones(n_pts)
    v_exp = np.ones(n_pts)
    v_ok = np.ones(n_pts, dtype=bool)
    for i in range(n_pts):
        try:
            v_init[i] = variance_factor(
                data, grid.points[i], Bandwidth.symmetric(h_arr[i], data.d))
        except DegenerateNeighborhoodError:
            # Empty initial window (classification fell back to a
            # neighbour too); leave the expanded widths untouched here.
            v_ok[i] = False
            continue
        v_exp[i] = variance_factor(
            data, grid.points[i], Bandwidth(lower[i], upper[i]))

    if shrink_mode == LOCAL:
        for i in range(n_pts):
            if d_prime[i] == 0 or not v_ok[i]:
                continue
            hp = shrink_halfwidth(h_arr[i], data.d, int(d_prime[i]),
                                  v_init[i], v_exp[i])
            lower[i, mask[i]] = hp
            upper[i, mask[i]] = hp
    else:
        m_global = float(np.mean(v_exp[v_ok])) / float(np.mean(v_init[v_ok]))
        factor = min(1.0, (m_global * float(np.mean(d_prime)) / data.d) ** 0.25)
        for i in range(n_pts):
            if d_prime[i] == 0 or not v_ok[i]:
                continue
            lower[i, mask[i]] = h_arr[i] * factor
            upper[i, mask[i]] = h_arr[i] * factor

    sig = SignificanceGrid(grid, mask, h_arr, lower, upper, n_fallback)
    return LabavsModel(data, config, bw_spec, final_fit_mode, shrink_mode, sig)


# ---------------------------------------------------------------------------
# prediction
# ---------------------------------------------------------------------------

def predict(model: LabavsModel, x_query) -> float:
    """Estimate the regression surface at one point.

    Borrows the relevant set and adjusted bandwidth of the nearest grid
    point, then refits locally at the query.  If the window turns out
    degenerate, every finite half-width is doubled (a bounded number of
    times) until the fit is identified.
    """
    q = np.asarray(x_query, dtype=float)
    gi = model.sig.grid.nearest_index(q)
    lower = model.sig.adjusted_lower[gi].copy()
    upper = model.sig.adjusted_upper[gi].copy()
    if model.final_fit_mode == REDUCED:
        active = np.flatnonzero(model.sig.relevant_mask[gi])
    else:
        active = np.arange(model.d)
    for attempt in range(_MAX_WIDEN + 1):
        try:
            bw = Bandwidth(lower, upper)
            if active.size == 0:
                return fit_local_constant(model.data, q, bw).estimate
            return fit_local_linear(model.data, q, bw, active=active).estimate
        except DegenerateNeighborhoodError:
            finite = np.concatenate([lower[np.isfinite(lower)],
                                     upper[np.isfinite(upper)]])
            if attempt == _MAX_WIDEN or finite.size == 0:
                raise
            lower = np.where(np.isfinite(lower), lower * 2.0, lower)
            upper = np.where(np.isfinite(upper), upper * 2.0, upper)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def dataset_digest(data: Dataset) -> str:
    """SHA-256 over the dataset's shape and raw float bytes."""
    h = hashlib.sha256()
    h.update(f"{data.n}x{data.d}".encode())
    h.update(np.ascontiguousarray(data.x).tobytes())
    h.update(np.ascontiguousarray(data.y).tobytes())
    return "sha256:" + h.hexdigest()


def save_model(model: LabavsModel, path):
    """Serialize a model to a versioned, self-describing JSON file.

    The training data rides along (prediction needs it) together with its
    digest.  Infinite half-widths appear as JSON ``Infinity`` literals,
    which ``json.load`` reads back exactly.
    """
    sig = model.sig
    doc = {
        "schema": MODEL_SCHEMA,
        "schema_version": MODEL_SCHEMA_VERSION,
        "dataset": {
            "digest": dataset_digest(model.data),
            "x": model.data.x.tolist(),
            "y": model.data.y.tolist(),
        },
        "selection": {"method": model.config.method, "lambda": model.config.lam},
        "bandwidth": {"kind": model.bw_spec.kind, "value": model.bw_spec.value},
        "final_fit_mode": model.final_fit_mode,
        "shrink_mode": model.shrink_mode,
        "grid": {
            "axes": [a.tolist() for a in sig.grid.axes],
            "spacing": sig.grid.spacing,
        },
        "relevant_mask": sig.relevant_mask.astype(int).tolist(),
        "initial_halfwidths": sig.initial_halfwidths.tolist(),
        "adjusted_lower": sig.adjusted_lower.tolist(),
        "adjusted_upper": sig.adjusted_upper.tolist(),
        "degenerate_fallbacks": sig.degenerate_fallbacks,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_model(path) -> LabavsModel:
    """Read a model file written by :func:`save_model`.

    Raises
    ------
    ParseError
        Wrong schema identifier or version, a missing field, or a dataset
        whose digest does not match its contents.
    """
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON ({exc})") from None
    if doc.get("schema") != MODEL_SCHEMA:
        raise ParseError(
            f"{path}: schema {doc.get('schema')!r} is not {MODEL_SCHEMA!r}"
        )
    if doc.get("schema_version") != MODEL_SCHEMA_VERSION:
        raise ParseError(
            f"{path}: schema version {doc.get('schema_version')!r} "
            f"is not {MODEL_SCHEMA_VERSION}"
        )
    try:
        data = Dataset(np.asarray(doc["dataset"]["x"], dtype=float),
                       np.asarray(doc["dataset"]["y"], dtype=float))
        if dataset_digest(data) != doc["dataset"]["digest"]:
            raise ParseError(f"{path}: dataset digest mismatch")
        config = SelectionConfig(doc["selection"]["method"],
                                 doc["selection"]["lambda"])
        bw_spec = BandwidthSpec(doc["bandwidth"]["kind"],
                                doc["bandwidth"]["value"])
        grid = Grid(tuple(np.asarray(a, dtype=float)
                          for a in doc["grid"]["axes"]),
                    float(doc["grid"]["spacing"]))
        sig = SignificanceGrid(
            grid,
            np.asarray(doc["relevant_mask"], dtype=bool),
            np.asarray(doc["initial_halfwidths"], dtype=float),
            np.asarray(doc["adjusted_lower"], dtype=float),
            np.asarray(doc["adjusted_upper"], dtype=float),
            int(doc["degenerate_fallbacks"]),
        )
        return LabavsModel(data, config, bw_spec, doc["final_fit_mode"],
                           doc["shrink_mode"], sig)
    except KeyError as exc:
        raise ParseError(f"{path}: missing field {exc}") from None

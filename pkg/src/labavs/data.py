"""Benchmark surfaces, seeded simulation, and CSV ingestion.

The benchmark regression surface is flat on one quadrant and curved where
either coordinate is positive, so different regions genuinely depend on
different predictor subsets.  Extra simulated dimensions never touch the
response, which makes them ground-truth redundant everywhere.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ParseError
from .localreg import Dataset


def huberised(x):
    """Squared loss blended into a linear tail at 0.4; zero for x <= 0.

    Piecewise: ``x^2`` on (0, 0.4], ``0.8 x - 0.16`` above 0.4, and 0 at or
    below 0.  Continuous with continuous first derivative.
    """
    a = np.asarray(x, dtype=float)
    out = np.where(a > 0.4, 0.8 * a - 0.16, np.where(a > 0.0, a * a, 0.0))
    if np.ndim(x) == 0:
        return float(out)
    return out


def quadrant_truth(x):
    """Benchmark surface: huberised norm of the positive parts of x1, x2.

    Constant 0 when both coordinates are nonpositive, depends on x1 alone
    when only x1 is positive (and symmetrically for x2), and on both in the
    positive quadrant.  Any further columns are ignored.

    Parameters
    ----------
    x : (d,), (n, 2+) array_like

    Returns
    -------
    float or (n,) ndarray
    """
    a = np.atleast_2d(np.asarray(x, dtype=float))
    if a.shape[1] < 2:
        raise ConfigurationError("the benchmark surface needs two coordinates")
    pos = np.maximum(a[:, :2], 0.0)
    r = np.hypot(pos[:, 0], pos[:, 1])
    out = huberised(r)
    if np.ndim(x) == 1:
        return float(out[0])
    return out


def true_relevant_set(x) -> frozenset:
    """Dimensions the benchmark surface actually depends on near ``x``.

    Valid away from the quadrant boundaries (where one-sided derivatives
    differ); on a boundary the open-quadrant convention of strict positivity
    applies.
    """
    a = np.asarray(x, dtype=float)
    return frozenset(j for j in (0, 1) if j < a.shape[0] and a[j] > 0.0)


@dataclass(frozen=True)
class SimSpec:
    """Recipe for one simulated dataset.

    ``d_extra`` pure-noise predictors are appended to the two genuine ones.
    The seed is split into two independent streams, one for the predictor
    draws and one for the response noise, so datasets that share a seed
    share their genuine predictor columns and noise regardless of
    ``d_extra``.
    """

    n: int = 500
    d_extra: int = 0
    noise_sd: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError(f"need n >= 1, got {self.n}")
        if self.d_extra < 0:
            raise ConfigurationError(f"d_extra must be >= 0, got {self.d_extra}")
        if self.noise_sd < 0.0:
            raise ConfigurationError(f"noise_sd must be >= 0, got {self.noise_sd}")


def simulate(spec: SimSpec) -> Dataset:
    """Draw a dataset from the benchmark design.

    Predictors are independent uniform on [-2, 2], drawn column by column
    from the design stream; the response is the benchmark surface plus
    centered Gaussian noise from the noise stream.
    """
    design_ss, noise_ss = np.random.SeedSequence(spec.seed).spawn(2)
    design_rng = np.random.default_rng(design_ss)
    noise_rng = np.random.default_rng(noise_ss)
    d = 2 + spec.d_extra
    x = np.empty((spec.n, d))
    for j in range(d):
        x[:, j] = design_rng.uniform(-2.0, 2.0, size=spec.n)
    y = quadrant_truth(x) + noise_rng.normal(0.0, spec.noise_sd, size=spec.n)
    return Dataset(x, y)


def scale_unit_variance(data: Dataset):
    """Rescale each predictor column to unit sample variance.

    Returns the scaled dataset and the per-column scale factors that were
    divided out.  Constant columns are left untouched (scale 1).
    """
    sd = np.std(data.x, axis=0, ddof=1) if data.n > 1 else np.ones(data.d)
    sd = np.where(sd > 0.0, sd, 1.0)
    return Dataset(data.x / sd, data.y), sd


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def load_csv(path, response_column="y") -> Dataset:
    """Read a headed numeric CSV into a Dataset.

    Parameters
    ----------
    path : str or Path
    response_column : str or int
        Column holding the response, by header name or 0-based position.
        All other columns become predictors, in file order.

    Raises
    ------
    ParseError
        Empty file, missing header, ragged rows, or a cell that does not
        parse as a number; messages name the 1-based file row and the
        column header.
    ConfigurationError
        The response column does not exist, or fewer than two columns.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [name.strip() for name in header]
        if len(header) < 2:
            raise ConfigurationError(
                f"{path}: need at least two columns, found {len(header)}"
            )
        if isinstance(response_column, int):
            if not (0 <= response_column < len(header)):
                raise ConfigurationError(
                    f"{path}: response index {response_column} out of range "
                    f"for {len(header)} columns"
                )
            resp = response_column
        else:
            try:
                resp = header.index(response_column)
            except ValueError:
                raise ConfigurationError(
                    f"{path}: no column named {response_column!r}; "
                    f"header is {header}"
                ) from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: row {lineno} has {len(row)} cells, expected "
                    f"{len(header)}"
                )
            vals = []
            for j, cell in enumerate(row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}: non-numeric value {cell!r} at row {lineno}, "
                        f"column {header[j]!r}"
                    ) from None
            rows.append(vals)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=float)
    pred = [j for j in range(len(header)) if j != resp]
    return Dataset(arr[:, pred], arr[:, resp])


def save_csv(data: Dataset, path, predictor_names=None, response_name="y"):
    """Write a Dataset as a headed CSV with 17-significant-digit floats."""
    if predictor_names is None:
        predictor_names = [f"x{j + 1}" for j in range(data.d)]
    if len(predictor_names) != data.d:
        raise ConfigurationError(
            f"{len(predictor_names)} predictor names for {data.d} columns"
        )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(predictor_names) + [response_name])
        for i in range(data.n):
            writer.writerow([f"{v:.17g}" for v in data.x[i]]
                            + [f"{data.y[i]:.17g}"])

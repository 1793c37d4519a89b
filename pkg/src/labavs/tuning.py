"""Cross-validated threshold choice and error evaluation.

Every fold of every protocol refits the full pipeline from scratch, so
these loops are honest but not cheap; leave-one-out is sensible for the
sort of n (about a hundred) where refitting n times is tolerable, while
the default protocol for threshold selection is 5-fold.
"""

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from . import pipeline
from .errors import (
    ConfigurationError,
    DimensionMismatchError,
    EvaluationError,
    NumericalError,
)
from .localreg import Dataset
from .pipeline import BandwidthSpec, LabavsModel
from .selection import HARD_THRESHOLD, SelectionConfig


@dataclass(frozen=True)
class CvProtocol:
    """How to score one threshold candidate.

    ``folds`` is either the string "loocv" or a fold count >= 2.  The seed
    only drives the fold shuffle; fits inside folds are deterministic.
    """

    bw_spec: BandwidthSpec
    method: str = HARD_THRESHOLD
    spacing: float | None = None
    final_fit_mode: str = pipeline.REDUCED
    shrink_mode: str = pipeline.LOCAL
    folds: object = 5
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.folds != "loocv":
            if not isinstance(self.folds, int) or self.folds < 2:
                raise ConfigurationError(
                    f"folds must be 'loocv' or an int >= 2, got {self.folds!r}"
                )


@dataclass(frozen=True)
class CvReport:
    """Outcome of a candidate sweep.

    ``candidates`` pairs each threshold with the bandwidth parameter in
    force; ``chosen`` indexes the smallest error, ties going to the larger
    threshold (the sparser model).
    """

    candidates: tuple
    cv_errors: tuple
    chosen: int

    @property
    def chosen_lambda(self) -> float:
        return self.candidates[self.chosen][0]

    @property
    def chosen_error(self) -> float:
        return self.cv_errors[self.chosen]


def _drop_rows(data: Dataset, rows) -> Dataset:
    keep = np.setdiff1d(np.arange(data.n), np.asarray(rows, dtype=int))
    return Dataset(data.x[keep], data.y[keep])


def _fold_predictions(data, config, bw_spec, spacing, mode, shrink_mode, rows):
    """Fit without ``rows`` and predict at them.  Returns (rows, preds) or
    (rows, None) when the fold degenerates."""
    try:
        model = pipeline.fit(_drop_rows(data, rows), config, bw_spec,
                             spacing=spacing, final_fit_mode=mode,
                             shrink_mode=shrink_mode)
        return rows, model.predict_many(data.x[rows])
    except NumericalError:
        return rows, None


def loocv_predictions(data: Dataset, config: SelectionConfig,
                      bw_spec: BandwidthSpec, spacing=None,
                      mode: str = pipeline.REDUCED,
                      shrink_mode: str = pipeline.LOCAL, n_jobs: int = 1):
    """Leave-one-out predictions, refitting the full pipeline per fold.

    Returns
    -------
    (preds, skipped) : ((n,) ndarray, list of int)
        ``preds`` is NaN at skipped rows; ``skipped`` lists the rows whose
        fold degenerated.
    """
    if data.n < 10:
        raise ConfigurationError(f"leave-one-out needs n >= 10, got {data.n}")
    runner = Parallel(n_jobs=n_jobs)
    out = runner(
        delayed(_fold_predictions)(data, config, bw_spec, spacing, mode,
                                   shrink_mode, [i])
        for i in range(data.n)
    )
    preds = np.full(data.n, np.nan)
    skipped = []
    for rows, vals in out:  # aggregation in fold order
        if vals is None:
            skipped.extend(rows)
        else:
            preds[rows] = vals
    return preds, skipped


def loocv_error(data: Dataset, config: SelectionConfig,
                bw_spec: BandwidthSpec, spacing=None,
                mode: str = pipeline.REDUCED,
                shrink_mode: str = pipeline.LOCAL, n_jobs: int = 1) -> float:
    """Mean squared leave-one-out prediction error.

    Raises
    ------
    EvaluationError
        More than 10% of folds degenerate.
    """
    preds, skipped = loocv_predictions(data, config, bw_spec, spacing, mode,
                                       shrink_mode, n_jobs)
    if len(skipped) > 0.1 * data.n:
        raise EvaluationError(
            f"{len(skipped)} of {data.n} leave-one-out folds degenerate"
        )
    used = np.isfinite(preds)
    err = data.y[used] - preds[used]
    return float(np.mean(err * err))


def test_error(model: LabavsModel, test: Dataset) -> float:
    """Mean squared prediction error on held-out data."""
    if test.d != model.d:
        raise DimensionMismatchError(
            f"test data has {test.d} dimensions, model has {model.d}"
        )
    err = test.y - model.predict_many(test.x)
    return float(np.mean(err * err))


def _kfold_error(data, config, protocol: CvProtocol) -> float:
    k = protocol.folds
    if data.n < k:
        raise ConfigurationError(f"cannot split n={data.n} rows into {k} folds")
    order = np.random.default_rng(protocol.seed).permutation(data.n)
    folds = [order[i::k] for i in range(k)]
    runner = Parallel(n_jobs=protocol.n_jobs)
    out = runner(
        delayed(_fold_predictions)(data, config, protocol.bw_spec,
                                   protocol.spacing, protocol.final_fit_mode,
                                   protocol.shrink_mode, rows)
        for rows in folds
    )
    preds = np.full(data.n, np.nan)
    skipped = 0
    for rows, vals in out:
        if vals is None:
            skipped += len(rows)
        else:
            preds[rows] = vals
    if skipped > 0.1 * data.n:
        raise EvaluationError(f"{skipped} of {data.n} held-out rows skipped")
    used = np.isfinite(preds)
    err = data.y[used] - preds[used]
    return float(np.mean(err * err))


def select_lambda(data: Dataset, candidates, protocol: CvProtocol) -> CvReport:
    """Score each threshold candidate by cross-validation.

    Candidates that fail outright score ``inf``; if every one fails an
    evaluation error is raised instead of a report.
    """
    lams = [float(c) for c in candidates]
    if len(lams) < 2:
        raise ConfigurationError(
            f"need at least two candidates, got {len(lams)}"
        )
    if any(lam < 0.0 for lam in lams):
        raise ConfigurationError("candidates must be nonnegative")
    errors = []
    for lam in lams:
        config = SelectionConfig(protocol.method, lam)
        try:
            if protocol.folds == "loocv":
                err = loocv_error(data, config, protocol.bw_spec,
                                  protocol.spacing, protocol.final_fit_mode,
                                  protocol.shrink_mode, protocol.n_jobs)
            else:
                err = _kfold_error(data, config, protocol)
        except NumericalError:
            err = np.inf
        errors.append(float(err))
    if not any(np.isfinite(e) for e in errors):
        raise EvaluationError("every candidate threshold degenerated")
    best = min(errors)
    chosen = max((i for i, e in enumerate(errors) if e == best),
                 key=lambda i: (lams[i], -i))
    pairs = tuple((lam, protocol.bw_spec.value) for lam in lams)
    return CvReport(pairs, tuple(errors), int(chosen))

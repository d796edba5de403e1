"""
Synthetic train/test pairs with a controlled kind and amount of dataset shift.

Base process: x ~ N(0, I_d), y ~ Bernoulli(sigmoid(w.x + b)), with w drawn
from the seed and b solved so that the positive rate equals ``base_rate``.

Shift kinds, applied to the test sample (and progressively over train months
for covariate and concept drift):
- covariate:          x mean moves by ``magnitude`` standard deviations along a fixed unit direction
- prior_probability:  positive rate moves by ``magnitude``; class-conditional x unchanged
- concept:            w rotates by magnitude * 30 degrees; P(x) unchanged
- selection_bias:     train rows are kept with probability sigmoid(magnitude * x0)
"""
import logging
from typing import Literal, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator
from scipy.optimize import brentq
from scipy.special import expit

from src.dataset.schema import ColumnSpec, FeatureSchema, MonthStamp
from src.dataset.table import TabularDataset
from src.errors import SpecError

logger = logging.getLogger(__name__)

LABEL_COLUMN = "default"
MONTH_COLUMN = "issue_d"
SIGNAL_NORM = 1.5
CONCEPT_ANGLE_PER_UNIT = np.pi / 6
PRIOR_RATE_BOUNDS = (0.01, 0.99)
MAX_SAMPLING_ROUNDS = 1000

ShiftKind = Literal["none", "covariate", "prior_probability", "concept", "selection_bias"]


class ShiftSpec(BaseModel):
    kind: ShiftKind = "none"
    magnitude: float = Field(default=0.0, ge=0.0)
    n_train: int = Field(default=20000, ge=1)
    n_test: int = Field(default=4000, ge=1)
    n_features: int = Field(default=10, ge=1)
    base_rate: float = Field(default=0.2, gt=0.0, lt=1.0)
    seed: int = 0
    months: int = Field(default=18, ge=1)
    start_month: MonthStamp = Field(default_factory=lambda: MonthStamp(year=2018, month=1))
    drift_share: float = Field(default=0.5, ge=0.0, le=1.0)

    @field_validator("start_month", mode="before")
    @classmethod
    def _parse_month(cls, value):
        return MonthStamp.parse(value) if isinstance(value, str) else value


def synthetic_schema(n_features: int) -> FeatureSchema:
    columns = [ColumnSpec(name=f"x{j}", kind="numeric") for j in range(n_features)]
    columns.append(ColumnSpec(name=LABEL_COLUMN, kind="numeric", missing_allowed=False))
    columns.append(ColumnSpec(name=MONTH_COLUMN, kind="numeric", missing_allowed=False))
    return FeatureSchema(columns=columns, label_column=LABEL_COLUMN, month_column=MONTH_COLUMN)


def solve_intercept(w: np.ndarray, base_rate: float) -> float:
    """b such that E[sigmoid(w.x + b)] = base_rate for x ~ N(0, I)."""
    sigma = float(np.linalg.norm(w))
    nodes, node_weights = np.polynomial.hermite_e.hermegauss(64)
    node_weights = node_weights / node_weights.sum()

    def gap(b: float) -> float:
        return float(np.sum(node_weights * expit(sigma * nodes + b))) - base_rate

    try:
        return float(brentq(gap, -50.0, 50.0, xtol=1e-12))
    except ValueError as e:
        raise SpecError(f"Cannot reach base rate {base_rate}: {e}") from e


class _Process:
    """The seeded ground truth shared by train and test."""

    def __init__(self, spec: ShiftSpec):
        self.spec = spec
        self.rng = np.random.default_rng(spec.seed)
        d = spec.n_features
        w_dir = self.rng.normal(size=d)
        self.w_unit = w_dir / np.linalg.norm(w_dir)
        self.w = SIGNAL_NORM * self.w_unit
        shift_dir = self.rng.normal(size=d)
        self.shift_unit = shift_dir / np.linalg.norm(shift_dir)
        self.b = solve_intercept(self.w, spec.base_rate)

    def orthogonal_unit(self) -> np.ndarray:
        """Unit vector orthogonal to w in the plane of w and the shift direction."""
        if self.spec.n_features < 2:
            raise SpecError("Concept shift needs at least two features")
        residual = self.shift_unit - (self.shift_unit @ self.w_unit) * self.w_unit
        norm = np.linalg.norm(residual)
        if norm < 1e-12:
            raise SpecError("Shift direction is parallel to the weight vector")
        return residual / norm

    def rotated_w(self, angle: np.ndarray) -> np.ndarray:
        """Weight vectors rotated by ``angle`` (one row per angle)."""
        u = self.orthogonal_unit()
        angle = np.asarray(angle, dtype=np.float64)[:, None]
        return SIGNAL_NORM * (np.cos(angle) * self.w_unit + np.sin(angle) * u)

    def draw_x(self, n: int) -> np.ndarray:
        return self.rng.standard_normal(size=(n, self.spec.n_features))

    def draw_y(self, logits: np.ndarray) -> np.ndarray:
        return (self.rng.random(logits.size) < expit(logits)).astype(np.int8)


def _month_index(n: int, months: int) -> np.ndarray:
    """Evenly spread month offsets 0..months-1, nondecreasing with row position."""
    return (np.arange(n) * months) // n


def _drift_progress(month_index: np.ndarray, months: int) -> np.ndarray:
    if months < 2:
        return np.zeros(month_index.size)
    return month_index / (months - 1)


def _generate_train(process: _Process) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    spec = process.spec
    n = spec.n_train
    month_index = _month_index(n, spec.months)
    progress = _drift_progress(month_index, spec.months) * spec.drift_share

    if spec.kind == "selection_bias":
        kept = []
        for _ in range(MAX_SAMPLING_ROUNDS):
            x = process.draw_x(2 * n)
            accept = process.rng.random(2 * n) < expit(spec.magnitude * x[:, 0])
            kept.append(x[accept])
            if sum(len(part) for part in kept) >= n:
                break
        else:
            raise SpecError("Selection bias rejected too many candidate rows")
        x = np.concatenate(kept)[:n]
        return x, process.draw_y(x @ process.w + process.b), month_index

    x = process.draw_x(n)
    if spec.kind == "covariate":
        x = x + (spec.magnitude * progress)[:, None] * process.shift_unit
    if spec.kind == "concept" and spec.magnitude > 0:
        w_rows = process.rotated_w(CONCEPT_ANGLE_PER_UNIT * spec.magnitude * progress)
        logits = np.einsum("ij,ij->i", x, w_rows) + process.b
    else:
        logits = x @ process.w + process.b
    return x, process.draw_y(logits), month_index


def _generate_test(process: _Process) -> Tuple[np.ndarray, np.ndarray]:
    spec = process.spec
    n = spec.n_test

    if spec.kind == "prior_probability":
        low, high = PRIOR_RATE_BOUNDS
        target = float(np.clip(spec.base_rate + spec.magnitude, low, high))
        n_pos = int(round(target * n))
        positives, negatives = [], []
        have_pos = have_neg = 0
        for _ in range(MAX_SAMPLING_ROUNDS):
            x = process.draw_x(2 * n)
            y = process.draw_y(x @ process.w + process.b)
            positives.append(x[y == 1])
            negatives.append(x[y == 0])
            have_pos += int((y == 1).sum())
            have_neg += int((y == 0).sum())
            if have_pos >= n_pos and have_neg >= n - n_pos:
                break
        else:
            raise SpecError(f"Cannot draw a test sample with positive rate {target}")
        x = np.concatenate([np.concatenate(positives)[:n_pos], np.concatenate(negatives)[: n - n_pos]])
        y = np.concatenate([np.ones(n_pos, dtype=np.int8), np.zeros(n - n_pos, dtype=np.int8)])
        order = process.rng.permutation(n)
        return x[order], y[order]

    x = process.draw_x(n)
    w = process.w
    if spec.kind == "covariate":
        x = x + spec.magnitude * process.shift_unit
    if spec.kind == "concept" and spec.magnitude > 0:
        w = process.rotated_w([CONCEPT_ANGLE_PER_UNIT * spec.magnitude])[0]
    return x, process.draw_y(x @ w + process.b)


def _to_dataset(schema: FeatureSchema, x: np.ndarray, y: np.ndarray, months, row_ids) -> TabularDataset:
    columns = {f"x{j}": x[:, j] for j in range(x.shape[1])}
    columns[LABEL_COLUMN] = y
    columns[MONTH_COLUMN] = months
    return TabularDataset.from_columns(schema, columns, row_ids=row_ids)


def generate_shifted(spec: ShiftSpec) -> Tuple[TabularDataset, TabularDataset]:
    """
    Train rows are stamped over ``months`` consecutive months from
    ``start_month``; test rows carry the month right after the last train month.
    Row ids are 0..n_train-1 for train and continue from n_train for test.
    """
    process = _Process(spec)
    schema = synthetic_schema(spec.n_features)

    x_train, y_train, month_index = _generate_train(process)
    x_test, y_test = _generate_test(process)

    start = spec.start_month.ordinal
    train = _to_dataset(
        schema, x_train, y_train,
        [MonthStamp.from_ordinal(start + int(m)) for m in month_index],
        np.arange(spec.n_train),
    )
    test_month = spec.start_month.shift(spec.months)
    test = _to_dataset(
        schema, x_test, y_test, [test_month] * spec.n_test,
        np.arange(spec.n_train, spec.n_train + spec.n_test),
    )
    logger.info(
        "Generated %s shift (magnitude %.2f): train positive rate %.3f, test positive rate %.3f",
        spec.kind, spec.magnitude, y_train.mean(), y_test.mean(),
    )
    return train, test

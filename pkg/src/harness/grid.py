"""
The five experimental sets and their configuration.

Set 1: chronological CV from each start month
Set 2: chronological holdout over (range start, validation start) pairs
Set 3: adversarial weights
Set 4: keep the most test-like rows, discard the rest
Set 5: validate on the most test-like rows, train on everything
"""
import logging
import time
from typing import Callable, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator

from src.adversarial import AdversarialReport
from src.dataset.schema import MonthStamp
from src.dataset.table import TabularDataset
from src.errors import GridCellError
from src.gbdt import BoostParams
from src.strategies import (
    TrainingPlan,
    augmented_cv_plan,
    chrono_cv_plan,
    chrono_holdout_plan,
    execute_plan,
    filtered_cv_plan,
    weighted_plan,
)

logger = logging.getLogger(__name__)

DEFAULT_KEEP_FRACTIONS = [round(1.0 - 0.05 * i, 2) for i in range(20)]


class GridConfig(BaseModel):
    """Which cells to run. Unset month lists are derived from the training months."""

    k: int = Field(default=5, ge=2)
    seed: int = 42
    set1_starts: Optional[List[MonthStamp]] = None
    set2_range_offsets: List[int] = Field(default_factory=lambda: [0, 6, 12])
    set2_pairs: Optional[List[Tuple[MonthStamp, MonthStamp]]] = None
    set3: bool = True
    set4_keep_fractions: List[float] = Field(default_factory=lambda: list(DEFAULT_KEEP_FRACTIONS))
    set5_keep_fractions: List[float] = Field(default_factory=lambda: list(DEFAULT_KEEP_FRACTIONS))
    threshold: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    num_boost_round: Optional[int] = Field(default=2000, ge=0)

    @field_validator("set4_keep_fractions", "set5_keep_fractions")
    @classmethod
    def _fractions(cls, values: List[float]) -> List[float]:
        for value in values:
            if not 0.0 < value <= 1.0:
                raise ValueError(f"keep fraction {value} outside (0, 1]")
        return values

    @property
    def needs_adversarial(self) -> bool:
        return self.set3 or bool(self.set4_keep_fractions) or bool(self.set5_keep_fractions)

    def boost_params(self, params: BoostParams) -> BoostParams:
        if self.num_boost_round is None:
            return params
        return params.model_copy(update={"num_boost_round": self.num_boost_round})

    def set1_months(self, train: TabularDataset) -> List[MonthStamp]:
        if self.set1_starts is not None:
            return list(self.set1_starts)
        if not train.has_months:
            return []
        return sorted(set(train.month_stamps()))

    def set2_month_pairs(self, train: TabularDataset) -> List[Tuple[MonthStamp, MonthStamp]]:
        """Each range start (first month + offset) paired with every later training month."""
        if self.set2_pairs is not None:
            return list(self.set2_pairs)
        if not train.has_months:
            return []
        months = sorted(set(train.month_stamps()))
        pairs = []
        for offset in self.set2_range_offsets:
            range_start = months[0].shift(offset)
            pairs.extend((range_start, valid_start) for valid_start in months if range_start < valid_start)
        return pairs

    def grid_size(self, train: TabularDataset) -> Dict[int, int]:
        return {
            1: len(self.set1_months(train)),
            2: len(self.set2_month_pairs(train)),
            3: int(self.set3),
            4: len(self.set4_keep_fractions),
            5: len(self.set5_keep_fractions),
        }


class ExperimentRow(BaseModel):
    set_id: int = Field(ge=1, le=5)
    order: int
    strategy_tag: str
    param_tag: str
    mean_valid_auc: float
    test_auc: float
    test_ks: float
    valid_test_psi: float
    adv_auc_used: Optional[float] = None
    runtime_s: float


class RetentionPoint(BaseModel):
    set_id: int
    keep_fraction: float
    month: str
    retained_share: float


class GridMetadata(BaseModel):
    n_train: int
    n_test: int
    k: int
    seed: int
    grid_size: Dict[int, int]
    adv_auc: Optional[float] = None
    threshold: Optional[float] = None
    verdict: Optional[str] = None


class ExperimentReport(BaseModel):
    rows: List[ExperimentRow] = Field(default_factory=list)
    metadata: Optional[GridMetadata] = None
    retention_profile: List[RetentionPoint] = Field(default_factory=list)

    def best(self, set_id: Optional[int] = None) -> Optional[ExperimentRow]:
        """Highest test AUC (first in (set, order) on ties)."""
        rows = [r for r in self.rows if set_id is None or r.set_id == set_id]
        if not rows:
            return None
        return max(sorted(rows, key=lambda r: (r.set_id, r.order)), key=lambda r: r.test_auc)


# ---- cells -------------------------------------------------------------------


def run_cell(
    set_id: int,
    order: int,
    param_tag: str,
    build_plan: Callable[[], TrainingPlan],
    train: TabularDataset,
    test: TabularDataset,
    params: BoostParams,
    adv_auc: Optional[float] = None,
) -> ExperimentRow:
    """Build and execute one plan; any failure is re-raised with its (set, param) key."""
    started = time.perf_counter()
    try:
        plan = build_plan()
        outcome = execute_plan(plan, train, test, params)
    except Exception as e:
        raise GridCellError(set_id, param_tag, e) from e
    runtime = time.perf_counter() - started
    logger.info("Set %d [%s]: test AUC %.4f (%.1fs)", set_id, param_tag, outcome.test_auc, runtime)
    return ExperimentRow(
        set_id=set_id,
        order=order,
        strategy_tag=plan.strategy_tag,
        param_tag=plan.param_tag,
        mean_valid_auc=outcome.mean_valid_auc,
        test_auc=outcome.test_auc,
        test_ks=outcome.test_ks,
        valid_test_psi=outcome.valid_test_psi,
        adv_auc_used=adv_auc,
        runtime_s=runtime,
    )


def set1_rows(train, test, params: BoostParams, config: GridConfig, on_cell=None) -> List[ExperimentRow]:
    rows = []
    for order, start in enumerate(config.set1_months(train)):
        rows.append(run_cell(
            1, order, start.compact(),
            lambda start=start: chrono_cv_plan(train, start, config.k, config.seed),
            train, test, params,
        ))
        if on_cell:
            on_cell()
    return rows


def set2_rows(train, test, params: BoostParams, config: GridConfig, on_cell=None) -> List[ExperimentRow]:
    rows = []
    for order, (range_start, valid_start) in enumerate(config.set2_month_pairs(train)):
        rows.append(run_cell(
            2, order, f"{range_start.compact()}/{valid_start.compact()}",
            lambda rs=range_start, vs=valid_start: chrono_holdout_plan(train, rs, vs),
            train, test, params,
        ))
        if on_cell:
            on_cell()
    return rows


def set3_rows(
    train, test, params: BoostParams, config: GridConfig, report: AdversarialReport, on_cell=None
) -> List[ExperimentRow]:
    row = run_cell(
        3, 0, "p_test",
        lambda: weighted_plan(train, report, config.k, config.seed),
        train, test, params, report.adv_auc,
    )
    if on_cell:
        on_cell()
    return [row]


def keep_fraction_rows(
    set_id: int, train, test, params: BoostParams, config: GridConfig, report: AdversarialReport, on_cell=None
) -> List[ExperimentRow]:
    """Set 4 (filtered) or Set 5 (augmented) over the configured keep fractions."""
    builder = filtered_cv_plan if set_id == 4 else augmented_cv_plan
    fractions = config.set4_keep_fractions if set_id == 4 else config.set5_keep_fractions
    rows = []
    for order, keep in enumerate(fractions):
        rows.append(run_cell(
            set_id, order, f"keep={keep:.2f}",
            lambda keep=keep: builder(train, report, keep, config.k, config.seed),
            train, test, params, report.adv_auc,
        ))
        if on_cell:
            on_cell()
    return rows

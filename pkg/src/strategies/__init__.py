# Training strategies: plan construction and execution
from src.strategies.executor import StrategyOutcome, ensemble_predict, execute_plan, save_outcome
from src.strategies.plans import (
    PlanFold,
    TrainingPlan,
    augmented_cv_plan,
    baseline_cv_plan,
    chrono_cv_plan,
    chrono_holdout_plan,
    filtered_cv_plan,
    load_plan,
    retained_count,
    retained_share_by_month,
    save_plan,
    split_by_score,
    weighted_plan,
)

__all__ = [
    "PlanFold",
    "StrategyOutcome",
    "TrainingPlan",
    "augmented_cv_plan",
    "baseline_cv_plan",
    "chrono_cv_plan",
    "chrono_holdout_plan",
    "ensemble_predict",
    "execute_plan",
    "filtered_cv_plan",
    "load_plan",
    "retained_count",
    "retained_share_by_month",
    "save_outcome",
    "save_plan",
    "split_by_score",
    "weighted_plan",
]

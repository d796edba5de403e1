"""
Boosting hyperparameters. Field names follow the LightGBM spelling so that
parameter files can be shared with the reference library.
"""
from pathlib import Path
from typing import Union

from pydantic import BaseModel, Field, ValidationError, model_validator

from src.errors import ContractError


class BoostParams(BaseModel):
    """Hyperparameters for ``fit``; defaults reproduce the published setup."""

    num_boost_round: int = Field(default=50000, ge=0)
    early_stopping_rounds: int = Field(default=200, ge=1)
    learning_rate: float = Field(default=0.1, gt=0.0)
    max_depth: int = Field(default=4, ge=1)
    num_leaves: int = Field(default=8, ge=2)
    colsample_bytree: float = Field(default=0.8, gt=0.0, le=1.0)
    subsample: float = Field(default=0.8, gt=0.0, le=1.0)
    subsample_freq: int = Field(default=3, ge=0)
    min_data_in_leaf: int = Field(default=20, ge=1)
    l2_reg: float = Field(default=1.0, ge=0.0)
    max_bins: int = Field(default=255, ge=2, le=4095)
    seed: int = 42
    min_sum_hessian_in_leaf: float = Field(default=1e-3, ge=0.0)
    verbose_every: int = Field(default=100, ge=0, description="Log progress every N rounds; 0 disables")

    @model_validator(mode="after")
    def _leaves_fit_depth(self) -> "BoostParams":
        if self.num_leaves > 2 ** self.max_depth:
            raise ValueError(f"num_leaves={self.num_leaves} exceeds 2**max_depth={2 ** self.max_depth}")
        return self

    @property
    def bagging_enabled(self) -> bool:
        return self.subsample < 1.0 and self.subsample_freq > 0


def load_params(path: Union[str, Path]) -> BoostParams:
    """Read a parameter file; unspecified fields keep their defaults."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        return BoostParams.model_validate_json(text)
    except ValidationError as e:
        raise ContractError(f"Invalid parameter file {path}: {e}") from e

"""
Schema types: column declarations and calendar-month stamps.

Schema JSON layout::

    {
      "columns": [
        {"name": "loan_amnt", "kind": "numeric", "missing_allowed": true},
        {"name": "purpose", "kind": "categorical"},
        {"name": "loan_status", "kind": "categorical"},
        {"name": "issue_d", "kind": "categorical"}
      ],
      "label_column": "loan_status",
      "month_column": "issue_d"
    }

The label and month columns are declared like any other column but are never
used as model features.
"""
import re
from functools import total_ordering
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_serializer, model_validator

from src.errors import ParseError, SchemaError


_ISO_MONTH = re.compile(r"^(\d{4})-(\d{1,2})$")
_COMPACT_MONTH = re.compile(r"^(\d{4})M(\d{1,2})$", re.IGNORECASE)
_ABBREV_MONTH = re.compile(r"^([A-Za-z]{3})-(\d{4})$")
_MONTH_ABBREVS = ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"]


@total_ordering
class MonthStamp(BaseModel):
    """A calendar month, ordered by (year, month)."""

    model_config = ConfigDict(frozen=True)

    year: int
    month: int = Field(ge=1, le=12)

    @model_validator(mode="before")
    @classmethod
    def _from_text(cls, data):
        # config files spell months as "2018-01" or "2018M1"
        if isinstance(data, str):
            stamp = cls.parse(data)
            return {"year": stamp.year, "month": stamp.month}
        return data

    @model_serializer
    def _as_text(self) -> str:
        return str(self)

    @classmethod
    def parse(cls, text: str) -> "MonthStamp":
        """Parse "2018-01", "2018M1" or the "Jan-2018" export style."""
        text = text.strip()
        for pattern in (_ISO_MONTH, _COMPACT_MONTH):
            match = pattern.match(text)
            if match:
                year, month = int(match.group(1)), int(match.group(2))
                if not 1 <= month <= 12:
                    raise ParseError(f"Month out of range in '{text}'")
                return cls(year=year, month=month)
        match = _ABBREV_MONTH.match(text)
        if match and match.group(1).lower() in _MONTH_ABBREVS:
            return cls(year=int(match.group(2)), month=_MONTH_ABBREVS.index(match.group(1).lower()) + 1)
        raise ParseError(f"Unrecognized month stamp '{text}'")

    @classmethod
    def from_ordinal(cls, ordinal: int) -> "MonthStamp":
        year, month0 = divmod(int(ordinal), 12)
        return cls(year=year, month=month0 + 1)

    @property
    def ordinal(self) -> int:
        """Months since year 0; consecutive months differ by one."""
        return self.year * 12 + self.month - 1

    def shift(self, months: int) -> "MonthStamp":
        return MonthStamp.from_ordinal(self.ordinal + months)

    def compact(self) -> str:
        return f"{self.year}M{self.month}"

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"

    def __lt__(self, other: "MonthStamp") -> bool:
        if not isinstance(other, MonthStamp):
            return NotImplemented
        return self.ordinal < other.ordinal


class ColumnSpec(BaseModel):
    """One declared column."""

    model_config = ConfigDict(frozen=True)

    name: str
    kind: Literal["numeric", "categorical"]
    missing_allowed: bool = True


class FeatureSchema(BaseModel):
    """Ordered column declarations plus the label and (optional) month column."""

    model_config = ConfigDict(frozen=True)

    columns: List[ColumnSpec]
    label_column: str
    month_column: Optional[str] = None

    @field_validator("columns")
    @classmethod
    def _unique_names(cls, columns: List[ColumnSpec]) -> List[ColumnSpec]:
        seen = set()
        for column in columns:
            if column.name in seen:
                raise ValueError(f"Duplicate column name: {column.name}")
            seen.add(column.name)
        return columns

    @model_validator(mode="after")
    def _special_columns_declared(self) -> "FeatureSchema":
        names = self.names
        if self.label_column not in names:
            raise ValueError(f"Label column '{self.label_column}' is not declared")
        if self.month_column is not None:
            if self.month_column not in names:
                raise ValueError(f"Month column '{self.month_column}' is not declared")
            if self.month_column == self.label_column:
                raise ValueError("Label and month columns must differ")
        return self

    @property
    def names(self) -> List[str]:
        return [column.name for column in self.columns]

    @property
    def feature_columns(self) -> List[ColumnSpec]:
        special = {self.label_column, self.month_column}
        return [column for column in self.columns if column.name not in special]

    @property
    def feature_names(self) -> List[str]:
        return [column.name for column in self.feature_columns]

    def column(self, name: str) -> ColumnSpec:
        for column in self.columns:
            if column.name == name:
                return column
        raise SchemaError(f"Column '{name}' is not in the schema")

    def has_column(self, name: str) -> bool:
        return name in self.names

    def replace_columns(self, columns: List[ColumnSpec], **updates) -> "FeatureSchema":
        """A new schema with the given column list (and optional label/month updates)."""
        fields = {"label_column": self.label_column, "month_column": self.month_column}
        fields.update(updates)
        return FeatureSchema(columns=columns, **fields)

    def features_match(self, other: "FeatureSchema") -> bool:
        """True when both schemas declare the same feature names and kinds (order-insensitive)."""
        mine = {(c.name, c.kind) for c in self.feature_columns}
        theirs = {(c.name, c.kind) for c in other.feature_columns}
        return mine == theirs

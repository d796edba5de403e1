# Tabular data: schema, storage, CSV ingestion, Lending Club preprocessing
from src.dataset.io import load_csv, load_dataset, load_schema, save_dataset
from src.dataset.lending_club import encode_loan_status, lending_club_schema, preprocess_lending_club
from src.dataset.schema import ColumnSpec, FeatureSchema, MonthStamp
from src.dataset.summary import ColumnSummary, summarize
from src.dataset.table import TabularDataset, month_counts, split_by_month

__all__ = [
    "ColumnSpec",
    "ColumnSummary",
    "FeatureSchema",
    "MonthStamp",
    "TabularDataset",
    "encode_loan_status",
    "lending_club_schema",
    "load_csv",
    "load_dataset",
    "load_schema",
    "month_counts",
    "preprocess_lending_club",
    "save_dataset",
    "split_by_month",
    "summarize",
]

"""
run_grid: drive the experiment-grid workflow and collect an ExperimentReport.
"""
import logging
from typing import Optional

from tqdm import tqdm

from src.adversarial import AdversarialReport
from src.dataset.table import TabularDataset
from src.gbdt import BoostParams
from src.harness.grid import ExperimentReport, GridConfig, GridMetadata, RetentionPoint
from src.strategies import retained_share_by_month

logger = logging.getLogger(__name__)


def _retention_profile(train: TabularDataset, report: ExperimentReport, adversarial: AdversarialReport):
    points = []
    if not train.has_months:
        return points
    for set_id in (4, 5):
        best = report.best(set_id)
        if best is None:
            continue
        keep = float(best.param_tag.split("=", 1)[1])
        for month, share in retained_share_by_month(train, adversarial, keep).items():
            points.append(RetentionPoint(set_id=set_id, keep_fraction=keep, month=str(month), retained_share=share))
    return points


def run_grid(
    train: TabularDataset,
    test: TabularDataset,
    params: Optional[BoostParams] = None,
    config: Optional[GridConfig] = None,
    adversarial_report: Optional[AdversarialReport] = None,
    show_progress: bool = True,
) -> ExperimentReport:
    """
    Run every configured cell and return the rows sorted by (set, order).

    A precomputed ``adversarial_report`` is reused by Sets 3-5 instead of
    running adversarial validation again.
    """
    from src.graph import get_grid_workflow

    config = config or GridConfig()
    params = config.boost_params(params or BoostParams())
    sizes = config.grid_size(train)
    logger.info("Grid of %d cells: %s", sum(sizes.values()), sizes)

    with tqdm(total=sum(sizes.values()), desc="grid", unit="cell", disable=not show_progress) as progress:
        final = get_grid_workflow().invoke({
            "train": train,
            "test": test,
            "params": params,
            "config": config,
            "adversarial_report": adversarial_report,
            "rows": [],
            "progress": progress,
        })

    adversarial = final.get("adversarial_report")
    report = ExperimentReport(
        rows=sorted(final["rows"], key=lambda r: (r.set_id, r.order)),
        metadata=GridMetadata(
            n_train=train.n_rows,
            n_test=test.n_rows,
            k=config.k,
            seed=config.seed,
            grid_size=sizes,
            adv_auc=None if adversarial is None else adversarial.adv_auc,
            threshold=None if adversarial is None else adversarial.threshold,
            verdict=None if adversarial is None else adversarial.verdict,
        ),
    )
    if adversarial is not None:
        report.retention_profile = _retention_profile(train, report, adversarial)
    return report

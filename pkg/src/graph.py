"""
LangGraph workflow for the experiment grid.
Runs the chronological sets, the adversarial step, and the shift-aware sets.
"""
import logging
import operator
from typing import Annotated, Any, List, Optional, TypedDict

from langgraph.graph import END, StateGraph

from src.adversarial import AdversarialReport, adversarial_validate
from src.dataset.table import TabularDataset
from src.gbdt import BoostParams
from src.harness.grid import (
    ExperimentRow,
    GridConfig,
    keep_fraction_rows,
    set1_rows,
    set2_rows,
    set3_rows,
)

logger = logging.getLogger(__name__)


# Define the state schema
class GridState(TypedDict):
    """State carried through one grid run."""
    train: TabularDataset
    test: TabularDataset
    params: BoostParams
    config: GridConfig
    adversarial_report: Optional[AdversarialReport]
    rows: Annotated[List[ExperimentRow], operator.add]
    progress: Any


STEPS = ["set1", "set2", "adversarial", "set3", "set4", "set5"]


def step_enabled(step: str, state: GridState) -> bool:
    """Whether a step has cells to run (or, for the adversarial step, consumers)."""
    config, train = state["config"], state["train"]
    sizes = config.grid_size(train)
    if step == "adversarial":
        return config.needs_adversarial and state.get("adversarial_report") is None
    return sizes[int(step[-1])] > 0


def next_step(after: Optional[str], state: GridState) -> str:
    start = 0 if after is None else STEPS.index(after) + 1
    for step in STEPS[start:]:
        if step_enabled(step, state):
            return step
    return "end"


def _tick(state: GridState):
    progress = state.get("progress")
    return progress.update if progress is not None else None


def create_grid_workflow():
    """
    Create the LangGraph workflow for one grid run.

    Flow:
    1. Set 1 and Set 2 (need month stamps on the training data)
    2. Adversarial validation, once, when any of Sets 3-5 is configured
    3. Sets 3, 4 and 5 share that adversarial report
    Steps without cells are skipped by the conditional edges.
    """

    def set1_node(state: GridState) -> dict:
        return {"rows": set1_rows(state["train"], state["test"], state["params"], state["config"], _tick(state))}

    def set2_node(state: GridState) -> dict:
        return {"rows": set2_rows(state["train"], state["test"], state["params"], state["config"], _tick(state))}

    def adversarial_node(state: GridState) -> dict:
        config = state["config"]
        report = adversarial_validate(
            state["train"], state["test"], state["params"],
            k=config.k, seed=config.seed, threshold=config.threshold,
        )
        return {"adversarial_report": report}

    def set3_node(state: GridState) -> dict:
        rows = set3_rows(
            state["train"], state["test"], state["params"], state["config"],
            state["adversarial_report"], _tick(state),
        )
        return {"rows": rows}

    def set4_node(state: GridState) -> dict:
        rows = keep_fraction_rows(
            4, state["train"], state["test"], state["params"], state["config"],
            state["adversarial_report"], _tick(state),
        )
        return {"rows": rows}

    def set5_node(state: GridState) -> dict:
        rows = keep_fraction_rows(
            5, state["train"], state["test"], state["params"], state["config"],
            state["adversarial_report"], _tick(state),
        )
        return {"rows": rows}

    nodes = {
        "set1": set1_node,
        "set2": set2_node,
        "adversarial": adversarial_node,
        "set3": set3_node,
        "set4": set4_node,
        "set5": set5_node,
    }

    # Build the graph
    workflow = StateGraph(GridState)
    for name, node in nodes.items():
        workflow.add_node(name, node)

    routes = {step: step for step in STEPS}
    routes["end"] = END
    workflow.set_conditional_entry_point(lambda s: next_step(None, s), routes)
    for step in STEPS:
        workflow.add_conditional_edges(step, lambda s, step=step: next_step(step, s), routes)

    return workflow.compile()


# Singleton workflow instance
_workflow = None


def get_grid_workflow():
    """Get or create the workflow instance."""
    global _workflow
    if _workflow is None:
        _workflow = create_grid_workflow()
    return _workflow

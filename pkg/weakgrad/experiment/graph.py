"""Experiment runner – LangGraph nodes, routing, and graph compilation.

The graph is ``prepare_cells → run_cell (loops once per estimator) →
write_outputs``. Cell ``k`` draws from substream ``k`` of the configured seed,
so cells never share random numbers and reordering the list only relabels them.
"""

from __future__ import annotations

import logging
from typing import Any, List

from langgraph.graph import END, StateGraph

from weakgrad.core.rng_streams import StreamSpec
from weakgrad.core.stats import EstimateReport, compare, summarize
from weakgrad.estimators import check_combination, run_estimator
from weakgrad.experiment.config import ExperimentConfig
from weakgrad.experiment.output import write_results
from weakgrad.experiment.state import ExperimentState, RunStatus, normalize_state

logger = logging.getLogger(__name__)


# ===================================================================
# Graph Nodes
# ===================================================================

def prepare_cells_node(state: ExperimentState) -> ExperimentState:
    """Build the model and queue one cell per estimator after checking each combination."""
    state = normalize_state(state)
    config = state["config"]
    model = config.build_model()
    for kind in config.estimator:
        check_combination(kind, model)
    state["model"] = model
    state["pending_cells"] = [
        {"ordinal": ordinal, "estimator": kind.value} for ordinal, kind in enumerate(config.estimator)
    ]
    state["status"] = RunStatus.RUNNING.value
    logger.info("Prepared %d cell(s) on %s (seed=%d)", len(state["pending_cells"]), model.name, config.seed)
    return state


def run_cell_node(state: ExperimentState) -> ExperimentState:
    """Run the next pending estimator cell and append its report."""
    state = normalize_state(state)
    config = state["config"]
    cell = state["pending_cells"].pop(0)
    logger.info("Running cell %d: %s", cell["ordinal"], cell["estimator"])
    batch = run_estimator(
        cell["estimator"],
        state["model"],
        StreamSpec(master_seed=config.seed, substream_index=cell["ordinal"]),
        n=config.n,
        time_budget_s=config.time_budget_s,
        fd_step=config.fd_step,
        block_size=config.block_size,
        workers=config.workers,
    )
    report = summarize(batch, config.confidence)
    state["reports"].append(report)
    logger.info(
        "Cell %d done: mean=%.6g, ci=[%.6g, %.6g], n=%d",
        cell["ordinal"], report.mean, report.ci_low, report.ci_high, report.n,
    )
    return state


def write_outputs_node(state: ExperimentState) -> ExperimentState:
    """Compare every later cell against the first, then write results."""
    state = normalize_state(state)
    reports = state["reports"]
    state["comparisons"] = [compare(reports[0], other) for other in reports[1:]]
    state["output_path"] = write_results(state["config"], reports, state["comparisons"])
    if state["output_path"]:
        logger.info("Results written to %s", state["output_path"])
    state["status"] = RunStatus.COMPLETED.value
    return state


# ── Routing helpers ──

def route_after_cell(state: ExperimentState) -> str:
    return "run_cell" if state.get("pending_cells") else "write_outputs"


# ===================================================================
# Build & compile the graph
# ===================================================================

def build_graph() -> Any:
    """Construct and compile the experiment workflow."""
    workflow = StateGraph(ExperimentState)

    workflow.add_node("prepare_cells", prepare_cells_node)
    workflow.add_node("run_cell", run_cell_node)
    workflow.add_node("write_outputs", write_outputs_node)

    workflow.set_entry_point("prepare_cells")
    workflow.add_edge("prepare_cells", "run_cell")
    workflow.add_conditional_edges(
        "run_cell",
        route_after_cell,
        {"run_cell": "run_cell", "write_outputs": "write_outputs"},
    )
    workflow.add_edge("write_outputs", END)
    return workflow.compile()


experiment_graph = build_graph()


def execute(config: ExperimentConfig) -> ExperimentState:
    """Run the full graph and return its final state."""
    initial = normalize_state({"config": config})
    final = experiment_graph.invoke(
        initial,
        config={"recursion_limit": len(config.estimator) + 10},
    )
    return normalize_state(final)


def run_experiment(config: ExperimentConfig) -> List[EstimateReport]:
    """One report per estimator, in the configured order; outputs written atomically."""
    return list(execute(config)["reports"])


__all__ = ["build_graph", "execute", "experiment_graph", "run_experiment"]

"""
Reproduction study: a dependency-ordered set of analysis steps.

Steps run as soon as their dependencies complete. Steps flagged parallel run
concurrently in worker threads; the others run one at a time. A failed step
marks every step that depends on it as failed without running it.
"""
import asyncio
import contextvars
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

import networkx as nx

from .errors import StudyStepError, ValidationError
from .link_model import LoadState
from .lsk_analysis import (MismatchSpec, SweepSpec, apply_mismatch, detune_solve,
                           flip_threshold, sweep_coupling)
from .presets import PRESETS, get_preset
from .reports import (decode_table, detune_table, envelope_table, flip_table, pte_table,
                      sweep_table, trace_table)
from .results import ResultTable, write_csv, write_svg
from .transient import TransientConfig, decode_lsk, simulate

logger = logging.getLogger(__name__)

StepAction = Callable[[Dict[str, Any]], Any]

PARASITIC_C_P = 12e-12
CORRECTED_C_S1 = 17.03e-12
TRANSIENT_COUPLING = 0.06
TRACE_STRIDE = 20
REPRODUCTION_BIT_PERIOD = 10e-6

_cancel_flag: "contextvars.ContextVar[Optional[threading.Event]]" = contextvars.ContextVar(
    "coillink_step_cancel", default=None)


def step_cancelled() -> bool:
    """True inside a step action once its step has timed out or its study was abandoned"""
    flag = _cancel_flag.get()
    return flag is not None and flag.is_set()


@dataclass
class StudyStep:
    """
    One unit of work.

    Attributes:
        step_id: Unique name
        action: Called with {dependency id: result} and returns the step result
        depends_on: Step ids that must complete first
        parallel: Run concurrently with other ready parallel steps
        timeout: Seconds before the step is abandoned; None waits forever.
            An abandoned action keeps running in its worker thread; long
            actions should poll step_cancelled() and stop producing output
    """
    step_id: str
    action: StepAction
    depends_on: List[str] = field(default_factory=list)
    parallel: bool = False
    timeout: Optional[float] = None


class Study:
    """Dependency graph of StudySteps"""

    def __init__(self, name: str = "study"):
        self.name = name
        self.steps: Dict[str, StudyStep] = {}
        self.graph = nx.DiGraph()

    def add_step(self, step: StudyStep) -> StudyStep:
        if step.step_id in self.steps:
            raise ValidationError(f"duplicate study step '{step.step_id}'")
        self.steps[step.step_id] = step
        self.graph.add_node(step.step_id)
        for dep in step.depends_on:
            self.graph.add_edge(dep, step.step_id)
        return step

    def validate(self):
        missing = sorted(node for node in self.graph.nodes if node not in self.steps)
        if missing:
            raise ValidationError(f"study '{self.name}' depends on undefined steps {missing}")
        if not nx.is_directed_acyclic_graph(self.graph):
            cycle = nx.find_cycle(self.graph)
            raise ValidationError(f"study '{self.name}' has a dependency cycle: {cycle}")

    def order(self) -> List[str]:
        """Deterministic execution order"""
        self.validate()
        return list(nx.lexicographical_topological_sort(self.graph))

    async def execute(self, timeout: Optional[float] = None) -> Dict:
        """Run every step; status is completed, partial, failed or timeout."""
        self.validate()
        completed: Dict[str, Any] = {}
        failed: Dict[str, Dict] = {}
        try:
            await asyncio.wait_for(self._execute_internal(completed, failed), timeout=timeout)
        except asyncio.TimeoutError:
            logger.error(f"Study '{self.name}' timed out after {timeout} seconds")
            return {"status": "timeout", "completed": completed, "failed": failed}

        if not failed:
            status = "completed"
        elif completed:
            status = "partial"
        else:
            status = "failed"
        logger.info(f"Study '{self.name}' {status}: {len(completed)} completed, {len(failed)} failed")
        return {"status": status, "completed": completed, "failed": failed}

    async def _execute_internal(self, completed: Dict, failed: Dict):
        pending = self.order()
        while pending:
            for step_id in list(pending):
                broken = [dep for dep in self.steps[step_id].depends_on if dep in failed]
                if broken:
                    failed[step_id] = {"error": f"skipped: dependency {broken[0]} failed"}
                    pending.remove(step_id)

            ready = [self.steps[s] for s in pending
                     if all(dep in completed for dep in self.steps[s].depends_on)]
            if not ready:
                break

            parallel_steps = [s for s in ready if s.parallel]
            serial_steps = [s for s in ready if not s.parallel]
            if parallel_steps:
                for step in parallel_steps:
                    pending.remove(step.step_id)
                await asyncio.gather(*(self._execute_step(s, completed, failed)
                                       for s in parallel_steps))
            for step in serial_steps:
                pending.remove(step.step_id)
                await self._execute_step(step, completed, failed)

    async def _execute_step(self, step: StudyStep, completed: Dict, failed: Dict):
        inputs = {dep: completed[dep] for dep in step.depends_on}
        loop = asyncio.get_running_loop()
        cancel = threading.Event()
        context = contextvars.copy_context()
        context.run(_cancel_flag.set, cancel)
        try:
            result = await asyncio.wait_for(
                loop.run_in_executor(None, context.run, step.action, inputs),
                timeout=step.timeout)
            completed[step.step_id] = result
            logger.debug(f"Step {step.step_id} completed")
        except asyncio.TimeoutError:
            cancel.set()
            logger.error(f"Step {step.step_id} timed out after {step.timeout} seconds")
            failed[step.step_id] = {"error": f"timed out after {step.timeout} seconds"}
        except asyncio.CancelledError:
            cancel.set()
            raise
        except Exception as e:
            logger.error(f"Step {step.step_id} failed: {e}")
            failed[step.step_id] = {"error": str(e)}


def run_study(study: Study, timeout: Optional[float] = None) -> Dict:
    """Synchronous wrapper for Study.execute"""
    return asyncio.run(study.execute(timeout))


def raise_for_failures(results: Dict):
    if results["failed"]:
        details = "; ".join(f"{k}: {v['error']}" for k, v in sorted(results["failed"].items()))
        raise StudyStepError(f"study {results['status']}: {details}")


# ---------------------------------------------------------------------------
# Figure reproduction
# ---------------------------------------------------------------------------

def _emit(out_dir: Path, name: str, table: ResultTable, svg: bool) -> Path:
    if step_cancelled():
        raise StudyStepError(f"{name}: step abandoned, output not written")
    path = write_csv(table, out_dir / f"{name}.csv")
    if svg:
        write_svg(table, out_dir / f"{name}.svg")
    return path


def reproduction_study(out_dir: Union[str, Path], svg: bool = False,
                       sweep: Optional[SweepSpec] = None,
                       transient: Optional[TransientConfig] = None) -> Study:
    """
    Every table and figure dataset of the S-P LSK analysis, one CSV per step.

    Steps: PTE of the presets; ΔZpri/ΔI1 sweeps for the matched link, a 12 pF
    parasitic, the parasitic with C_s1 +1%, and the 17.03 pF detuned primary;
    flip thresholds; the detune solve and a sweep at its solution; the flipping
    and corrected transients at k = 0.06 with their decodes.
    """
    out = Path(out_dir)
    sweep = sweep or SweepSpec()
    transient = transient or TransientConfig(bit_period=REPRODUCTION_BIT_PERIOD)
    base = get_preset("flat")
    parasitic = base.with_c_p(PARASITIC_C_P)
    cases = {
        "matched": (base, None),
        "parasitic": (base, MismatchSpec(c_p_override=PARASITIC_C_P)),
        "parasitic_cs1_plus1": (base, MismatchSpec(c_p_override=PARASITIC_C_P,
                                                   c_s1_relative_error=0.01)),
        "detuned_17p03": (parasitic.with_c_s1(CORRECTED_C_S1), None),
    }
    study = Study("reproduce")

    def pte_step(_: Dict) -> Path:
        scenarios = [(name, get_preset(name)) for name in sorted(PRESETS)]
        return _emit(out, "pte", pte_table(scenarios, LoadState.LIGHT), svg)

    study.add_step(StudyStep("pte", pte_step, parallel=True))

    for name, (template, mismatch) in cases.items():
        def sweep_step(_: Dict, template=template, mismatch=mismatch, name=name) -> Path:
            result = sweep_coupling(template, mismatch, sweep)
            return _emit(out, f"sweep_{name}", sweep_table(result, f"ΔI1, {name}"), svg)

        study.add_step(StudyStep(f"sweep_{name}", sweep_step, parallel=True))

    def thresholds_step(_: Dict) -> Path:
        table = None
        for name, (template, mismatch) in cases.items():
            row_table = flip_table(flip_threshold(template, mismatch, (sweep.k_min, sweep.k_max)))
            if table is None:
                table = ResultTable(["case"] + row_table.columns, title="Flip thresholds")
            table.append([name] + row_table.rows[0])
        return _emit(out, "flip_thresholds", table, False)

    study.add_step(StudyStep("flip_thresholds", thresholds_step, parallel=True))

    def detune_step(_: Dict):
        solution = detune_solve(parasitic, k_range=(sweep.k_min, sweep.k_max))
        _emit(out, "detune", detune_table(solution, parasitic), False)
        return solution

    study.add_step(StudyStep("detune", detune_step, parallel=True))

    def solved_sweep_step(inputs: Dict) -> Path:
        solved = parasitic.with_c_s1(inputs["detune"].c_s1_solved)
        return _emit(out, "sweep_detune_solution",
                     sweep_table(sweep_coupling(solved, None, sweep), "ΔI1, solved C_s1"), svg)

    study.add_step(StudyStep("sweep_detune_solution", solved_sweep_step, depends_on=["detune"]))

    transients = {
        "flipping": apply_mismatch(base.with_coupling(TRANSIENT_COUPLING),
                                   MismatchSpec(PARASITIC_C_P, 0.01)),
        "corrected": parasitic.with_coupling(TRANSIENT_COUPLING).with_c_s1(CORRECTED_C_S1),
    }
    for name, scenario in transients.items():
        def transient_step(_: Dict, scenario=scenario, name=name):
            trace = simulate(scenario, transient)
            _emit(out, f"transient_{name}", trace_table(trace, TRACE_STRIDE), svg)
            _emit(out, f"envelope_{name}", envelope_table(trace.envelope), svg)
            return trace.envelope

        study.add_step(StudyStep(f"transient_{name}", transient_step, parallel=True))

        def decode_step(inputs: Dict, name=name) -> Path:
            result = decode_lsk(inputs[f"transient_{name}"], transient)
            return _emit(out, f"decode_{name}", decode_table(result, transient), False)

        study.add_step(StudyStep(f"decode_{name}", decode_step, depends_on=[f"transient_{name}"]))

    return study

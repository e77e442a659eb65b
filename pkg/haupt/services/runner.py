"""
Check Runner

Runs a batch of named checks, one after another or on a process pool, and
returns the reports in submission order. Tasks carry only picklable
arguments; each worker process opens its own catalog from the task's path.
"""

from __future__ import annotations

import time
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from haupt.schemas.reports import CheckReport, MultiplicityReport
from haupt.services import annihilation, moonshine
from haupt.services.catalog import get_catalog
from haupt.utils.logger import get_logger


logger = get_logger("CheckRunner")

Report = CheckReport | MultiplicityReport


def _lehner(symbol: str, window: int = 600, **kwargs: Any) -> CheckReport:
    return annihilation.check_lehner(annihilation.lehner_datum(symbol), window, **kwargs)


def _moonshine(group: str, p: int, assignment: dict[str, str] | None = None, **kwargs: Any) -> MultiplicityReport:
    table = moonshine.load_group(group)
    return moonshine.check_padic_moonshine(
        table, assignment or moonshine.load_assignment(group), p, **kwargs
    )


def _assignment(group: str, assignment: dict[str, str] | None = None, **kwargs: Any) -> CheckReport:
    kwargs.pop("catalog", None)
    table = moonshine.load_group(group)
    return moonshine.validate_assignment(table, assignment or moonshine.load_assignment(group))


CHECKS: dict[str, Callable[..., Report]] = {
    "congruences": annihilation.check_congruence_family,
    "compression": annihilation.check_compression,
    "lehner": _lehner,
    "rates": annihilation.check_rate_bound,
    "increment": annihilation.check_increment,
    "cycle": annihilation.detect_mod_p_cycle,
    "weak": annihilation.check_weak_annihilation,
    "up_vanishing": annihilation.check_up_vanishing,
    "valuations": annihilation.check_valuation_growth,
    "strong": annihilation.check_strong_annihilation,
    "exponent": moonshine.check_exponent_group,
    "orderbound": moonshine.check_order_bound,
    "assignment": _assignment,
    "moonshine": _moonshine,
}


@dataclass(frozen=True)
class CheckTask:
    """One check invocation: a CHECKS key plus keyword arguments."""

    check: str
    kwargs: dict[str, Any] = field(default_factory=dict)
    catalog_path: str | None = None

    def run(self) -> Report:
        try:
            fn = CHECKS[self.check]
        except KeyError:
            raise ValueError(f"unknown check {self.check!r}") from None
        return fn(**self.kwargs, catalog=get_catalog(self.catalog_path))


def _run_task(task: CheckTask) -> Report:
    return task.run()


class CheckRunner:
    """Executes CheckTasks with up to ``parallelism`` worker processes."""

    def __init__(self, parallelism: int = 1):
        self.parallelism = max(1, parallelism)

    def run(self, tasks: Sequence[CheckTask]) -> list[Report]:
        started = time.perf_counter()
        logger.info("🚀 Running checks", count=len(tasks), parallelism=self.parallelism)

        if self.parallelism == 1 or len(tasks) <= 1:
            results = [task.run() for task in tasks]
        else:
            workers = min(self.parallelism, len(tasks))
            with ProcessPoolExecutor(max_workers=workers) as pool:
                # map preserves submission order
                results = list(pool.map(_run_task, tasks))

        logger.info(
            "✅ Checks complete",
            count=len(results),
            duration_ms=round((time.perf_counter() - started) * 1000, 2),
        )
        return results


__all__ = ["CHECKS", "CheckRunner", "CheckTask", "Report"]

"""Candidate-count comparison of the pruning modes over a suite of problems."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from monoprune.chc import Problem
from monoprune.problemfile import load_problem, read_problem
from monoprune.search import Mode, SearchConfig, SearchResult, compare_runs

COLUMNS = ("problem", "mode", "dequeued", "pruned", "completeChecked", "solved", "solutionSize", "elapsedMs")


@dataclass
class BenchRow:
    problem: str
    mode: str
    dequeued: int
    pruned: int
    complete_checked: int
    solved: bool
    solution_size: int | None
    elapsed_ms: float

    @classmethod
    def of(cls, name: str, r: SearchResult) -> BenchRow:
        s = r.stats
        size = r.program.size if r.program is not None else None
        return cls(name, r.mode.value, s.dequeued, s.pruned, s.complete_checked, r.solved, size, s.elapsed_ms)

    def cells(self) -> list:
        size = "" if self.solution_size is None else self.solution_size
        return [
            self.problem,
            self.mode,
            self.dequeued,
            self.pruned,
            self.complete_checked,
            str(self.solved).lower(),
            size,
            f"{self.elapsed_ms:.1f}",
        ]


def bundled_names() -> list[str]:
    root = resources.files("monoprune") / "problems"
    return sorted(p.name[: -len(".problem")] for p in root.iterdir() if p.name.endswith(".problem"))


def bundled_problem(name: str) -> Problem:
    name = name.removesuffix(".problem")
    path = resources.files("monoprune") / "problems" / f"{name}.problem"
    if not path.is_file():
        raise FileNotFoundError(f"no bundled problem named {name!r}")
    return load_problem(path.read_text(encoding="utf-8"))


def resolve_problem(arg: str) -> Problem:
    """A file path if one exists, else the name of a bundled problem."""
    if os.path.exists(arg):
        return read_problem(arg)
    return bundled_problem(arg)


def load_suite(suite: str) -> list[tuple[str, Problem]]:
    if suite == "bundled":
        return [(n, bundled_problem(n)) for n in bundled_names()]
    path = Path(suite)
    if path.is_dir():
        files = sorted(path.glob("*.problem"))
        return [(f.stem, read_problem(f)) for f in files]
    p = resolve_problem(suite)
    return [(p.name, p)]


def run_bench(
    problems: list[tuple[str, Problem]],
    modes: list[Mode],
    max_size: int = 25,
    max_candidates: int = 200_000,
) -> list[BenchRow]:
    rows = []
    for name, problem in problems:
        cfgs = [SearchConfig(max_size=max_size, max_candidates=max_candidates, mode=m) for m in modes]
        for r in compare_runs(problem, cfgs):
            rows.append(BenchRow.of(name, r))
    return rows


def to_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()

"""The JSON analysis artifact: chosen orders, monotonicity entries and hole abstractions.

Serialization is byte-stable: keys are sorted, indentation is fixed, and the
only non-JSON numbers (infinite integer endpoints) are spelled ``"inf"`` and
``"-inf"``.  Values are stored in a sort-free JSON form; decoding them needs
the problem the artifact was computed for.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any

from monoprune import __version__
from monoprune.abstract import EMPTY, AbstractSemantics, HoleTable, Interval
from monoprune.chc import Problem
from monoprune.orders import Direction, MonoEntry, MonotonicityProfile, OrderAssignment, problem_sort_keys
from monoprune.values import INF, NEG_INF, BoolMatrix, CharMatrices, SemType, StrT, is_tuple_sort, MatT

SCHEMA = 1
CAVEAT = (
    "bruteForce verdicts come from a finite sample of each sort; pruning with them is sound "
    "only relative to that sample"
)
TAGS = ("bruteForce", "assumed", "external")


class SchemaError(ValueError):
    pass


def encode_value(v: Any) -> Any:
    if isinstance(v, bool):
        return v
    if isinstance(v, CharMatrices):
        return {"string": v.text}
    if isinstance(v, BoolMatrix):
        return {"matrix": v.to_bits()}
    if isinstance(v, tuple):
        return [encode_value(x) for x in v]
    if isinstance(v, float):
        if v == INF:
            return "inf"
        if v == NEG_INF:
            return "-inf"
        raise SchemaError(f"unexpected float {v!r}")
    if isinstance(v, int):
        return v
    raise SchemaError(f"cannot encode {v!r}")


def decode_value(j: Any, sort: SemType) -> Any:
    if isinstance(sort, StrT):
        if not isinstance(j, dict) or "string" not in j:
            raise SchemaError(f"expected a string value, got {j!r}")
        return CharMatrices(j["string"], sort.alphabet)
    if isinstance(sort, MatT):
        if not isinstance(j, dict) or "matrix" not in j:
            raise SchemaError(f"expected a matrix value, got {j!r}")
        return BoolMatrix.from_bits([[int(c) for c in row] for row in j["matrix"]])
    if is_tuple_sort(sort):
        if not isinstance(j, list) or len(j) != len(sort.components):
            raise SchemaError(f"expected a {len(sort.components)}-tuple, got {j!r}")
        return tuple(decode_value(x, c) for x, c in zip(j, sort.components))
    if j == "inf":
        return INF
    if j == "-inf":
        return NEG_INF
    if isinstance(j, bool) or isinstance(j, int):
        return j
    raise SchemaError(f"cannot decode {j!r} as {sort}")


@dataclass
class AnalysisArtifact:
    problem: str
    orders: dict[str, str]
    monotonicity: list[dict]
    holes: list[dict] = field(default_factory=list)
    sample: str = ""
    caveat: str = CAVEAT
    tool: dict = field(default_factory=lambda: {"name": "monoprune", "version": __version__})
    schema: int = SCHEMA

    @property
    def monotone_productions(self) -> list[str]:
        names: list[str] = []
        bad = set()
        for m in self.monotonicity:
            if m["production"] not in names:
                names.append(m["production"])
            if any(d == "none" for d in m["directions"]):
                bad.add(m["production"])
        return [n for n in names if n not in bad]

    def omega(self) -> OrderAssignment:
        return OrderAssignment.of(self.orders)

    def profile(self) -> MonotonicityProfile:
        prof = MonotonicityProfile(self.omega())
        for m in self.monotonicity:
            prof.add(
                MonoEntry(
                    m["production"],
                    m["rule"],
                    m["expression"],
                    tuple(Direction(d) for d in m["directions"]),
                    m["tag"],
                    m.get("sample", ""),
                )
            )
        return prof

    def hole_table(self, problem: Problem) -> HoleTable:
        """Decode the hole entries against ``problem``'s nonterminal sorts."""
        omega = self.omega()
        decls = problem.grammar.decls
        table = HoleTable()
        for h in self.holes:
            nt = h["nonterminal"]
            if nt not in decls:
                raise SchemaError(f"unknown nonterminal {nt}")
            d = decls[nt]
            io, oo = omega.order_for(d.input_type), omega.order_for(d.output_type)
            key = Interval(decode_value(h["key"]["lo"], d.input_type), decode_value(h["key"]["hi"], d.input_type), io)
            if h.get("empty"):
                val = EMPTY
            else:
                val = Interval(decode_value(h["lo"], d.output_type), decode_value(h["hi"], d.output_type), oo)
            table.set(nt, key, val)
        return table


def build_artifact(
    problem: Problem, profile: MonotonicityProfile, table: HoleTable | None = None, sample: str = ""
) -> AnalysisArtifact:
    omega = profile.omega
    orders = {k: omega.name_for(k) for k in problem_sort_keys(problem)}
    mono = [
        {
            "production": e.production,
            "rule": e.rule,
            "expression": e.expression,
            "directions": [d.value for d in e.directions],
            "tag": e.tag,
            "sample": e.sample,
        }
        for e in profile.entries
    ]
    holes = []
    if table is not None:
        start = problem.grammar.start
        inputs = [ex.input for ex in problem.examples]
        for nt, key, value in table.items():
            idx = None
            if nt == start and key.is_point and key.lo in inputs:
                idx = inputs.index(key.lo)
            holes.append(
                {
                    "nonterminal": nt,
                    "example": idx,
                    "key": {"lo": encode_value(key.lo), "hi": encode_value(key.hi)},
                    "empty": value.empty,
                    "lo": None if value.empty else encode_value(value.lo),
                    "hi": None if value.empty else encode_value(value.hi),
                }
            )
    return AnalysisArtifact(problem.name, orders, mono, holes, sample)


def write_artifact(a: AnalysisArtifact) -> str:
    return json.dumps(asdict(a), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


_REQUIRED = {"problem": str, "orders": dict, "monotonicity": list, "holes": list, "schema": int}
_ENTRY = {"production": str, "rule": int, "expression": str, "directions": list, "tag": str}
_HOLE = {"nonterminal": str, "key": dict, "lo": object, "hi": object}


def _check(obj: dict, spec: dict, where: str):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    for k, t in spec.items():
        if k not in obj:
            raise SchemaError(f"{where}: missing field {k!r}")
        if t is not object and not isinstance(obj[k], t):
            raise SchemaError(f"{where}: field {k!r} should be {t.__name__}")


def read_artifact(text: str) -> AnalysisArtifact:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not JSON: {exc}") from exc
    _check(data, _REQUIRED, "artifact")
    if data["schema"] != SCHEMA:
        raise SchemaError(f"unsupported schema {data['schema']}")
    for i, m in enumerate(data["monotonicity"]):
        _check(m, _ENTRY, f"monotonicity[{i}]")
        if m["tag"] not in TAGS:
            raise SchemaError(f"monotonicity[{i}]: unknown tag {m['tag']!r}")
        for d in m["directions"]:
            if d not in {x.value for x in Direction}:
                raise SchemaError(f"monotonicity[{i}]: unknown direction {d!r}")
    for i, h in enumerate(data["holes"]):
        _check(h, _HOLE, f"holes[{i}]")
    try:
        OrderAssignment.of(data["orders"])
    except Exception as exc:
        raise SchemaError(f"orders: {exc}") from exc
    known = {f for f in AnalysisArtifact.__dataclass_fields__}
    extra = set(data) - known
    if extra:
        raise SchemaError(f"unknown fields {sorted(extra)}")
    return AnalysisArtifact(**data)


def analyze_problem(problem: Problem, workers: int = 1, candidates=None, gfa: bool = True):
    """Order synthesis, monotonicity profile and (optionally) hole tables in one call."""
    from monoprune.gfa import example_inputs, solve_holes
    from monoprune.orders import DomainSample, synthesize_orders

    cfg = DomainSample()
    _, profile = synthesize_orders(problem, candidates, cfg, workers)
    table = None
    if gfa:
        sem = AbstractSemantics(problem, profile)
        table = solve_holes(sem, example_inputs(sem)).table
    return build_artifact(problem, profile, table, cfg.describe())

"""Recursive goal expansion through an oracle, compiled to a logic program.

In horn mode each expanded goal becomes ``g :- i1, ..., ik`` over its
accepted items and unexpanded items become facts.  In dual mode the items are
read as consequences: ``g => i1 ; ... ; ik`` with ``i => false`` at the
frontier.  A goal is expanded at most once; later mentions only reference it.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .clauses import Kind, Program, serialize_program
from .oracles import Oracle, OracleError, OracleRequest, Purpose, accept
from .solve import model_atoms

ADVISOR_THRESHOLD = 50.0


class Agent(str, Enum):
    RECURSOR = "recursor"
    ADVISOR = "advisor"
    RATER = "rater"


@dataclass(frozen=True)
class ExplorationConfig:
    initiator: str
    max_depth: int = 1
    mode: Kind = Kind.HORN
    agent: Agent = Agent.RECURSOR
    rater_threshold: float = 70.0
    max_branching: int = 5
    disjunctive: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mode", Kind(self.mode))
        object.__setattr__(self, "agent", Agent(self.agent))
        if not self.initiator.strip():
            raise ValueError("empty initiator")
        if self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")
        if self.max_branching < 1:
            raise ValueError("max_branching must be positive")
        if not 0 <= self.rater_threshold <= 100:
            raise ValueError("rater_threshold outside [0, 100]")


@dataclass
class Step:
    depth: int
    goal: str
    accepted: list[str]
    rejected: list[str]


@dataclass
class ExplorationTrace:
    steps: list[Step] = field(default_factory=list)
    visited: set[str] = field(default_factory=set)

    def to_json(self) -> str:
        d = {"steps": [vars(s) for s in self.steps], "visited": sorted(self.visited)}
        return json.dumps(d, indent=1, ensure_ascii=False) + "\n"


class ExplorationError(RuntimeError):
    """Exploration failed; ``trace`` holds the steps completed so far."""

    def __init__(self, message: str, trace: ExplorationTrace):
        super().__init__(message)
        self.trace = trace


def explore(cfg: ExplorationConfig, oracle: Oracle) -> tuple[Program, ExplorationTrace]:
    trace = ExplorationTrace()
    rules: list[tuple[str, list[str]]] = []
    frontier: list[str] = []
    initiator = cfg.initiator.strip()

    def ask(req: OracleRequest):
        try:
            return oracle.ask(req)
        except OracleError as e:
            raise ExplorationError(f"oracle failure on {req.goal_text!r}: {e}", trace) from e

    def judge(item: str, context: tuple[str, ...]) -> bool:
        if cfg.agent is Agent.RECURSOR:
            return True
        resp = ask(OracleRequest(Purpose.RATE, item, context, {"agent": cfg.agent.value}))
        if resp.rating is None:
            raise ExplorationError(f"no rating for {item!r}", trace)
        limit = cfg.rater_threshold if cfg.agent is Agent.RATER else ADVISOR_THRESHOLD
        return accept(resp.rating, limit)

    def visit(goal: str, depth: int, path: tuple[str, ...]) -> None:
        trace.visited.add(goal)
        if depth >= cfg.max_depth:
            frontier.append(goal)
            return
        params = {"mode": cfg.mode.value, "branching": str(cfg.max_branching)}
        resp = ask(OracleRequest(Purpose.EXPAND, goal, path, params))
        items = [i for i in dict.fromkeys(x.strip() for x in resp.items) if i and i != goal]
        items = items[:cfg.max_branching]
        context = path + (goal,)
        accepted, rejected = [], []
        for item in items:
            (accepted if judge(item, context) else rejected).append(item)
        trace.steps.append(Step(depth, goal, accepted, rejected))
        if not accepted:
            if depth == 0:
                raise ExplorationError(f"no accepted items for the initiator {goal!r}", trace)
            # a goal whose items were all rejected gets no clause
            return
        rules.append((goal, accepted))
        for item in accepted:
            if item not in trace.visited:
                visit(item, depth + 1, context)

    visit(initiator, 0, ())
    return build_program(cfg, rules, frontier), trace


def build_program(cfg: ExplorationConfig, rules, frontier) -> Program:
    if cfg.mode is Kind.DUAL:
        return Program.dual([*rules, *((f, ["false"]) for f in frontier)])
    if cfg.disjunctive:
        clauses = [(g, [i]) for g, items in rules for i in items]
    else:
        clauses = list(rules)
    return Program.horn([*clauses, *((f, ["true"]) for f in frontier)])


def slug(text: str) -> str:
    s = re.sub(r"[^0-9A-Za-z]+", "_", text.strip().lower()).strip("_")
    return s[:60] or "program"


def render_model(atoms: list[str], kind: Kind, title: str) -> str:
    from .clauses import quote

    lines = [f"% {title}"]
    if kind is Kind.DUAL:
        lines += [f"{quote(a)} => 'false'." for a in atoms]
    else:
        lines += [f"{quote(a)} :- 'true'." for a in atoms]
    return "\n".join(lines) + "\n"


def save_artifacts(program: Program, trace: ExplorationTrace, outdir, stem: str,
                   engine: str = "fixpoint") -> dict[str, Path]:
    """Write ``<stem>.pro``, ``<stem>_trace.json`` and ``<stem>_model.pro``."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    atoms, status = model_atoms(program, engine)
    what = "falsified atoms" if program.kind is Kind.DUAL else "minimal model"
    title = f"{what} of {stem}.pro ({engine} engine, {status.value})"
    paths = {"program": out / f"{stem}.pro", "trace": out / f"{stem}_trace.json",
             "model": out / f"{stem}_model.pro"}
    paths["program"].write_text(serialize_program(program), encoding="utf-8")
    paths["trace"].write_text(trace.to_json(), encoding="utf-8")
    paths["model"].write_text(render_model(atoms, program.kind, title), encoding="utf-8")
    return paths

"""Relation graphs from programs: implication, generalization and SVO edges."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from .clauses import FALSE_ID, TRUE_ID, HornClause, Model, Program
from .oracles import Oracle, OracleRequest, Purpose, parse_items

log = logging.getLogger(__name__)

IMPLIES = ":"
IS_A = "is"


@dataclass(frozen=True)
class RelEdge:
    source: str
    label: str
    target: str


@dataclass(frozen=True)
class SVOTriple:
    subject: str
    verb: str
    object: str

    def __post_init__(self):
        for name in ("subject", "verb", "object"):
            v = getattr(self, name).strip()
            if not v:
                raise ValueError(f"empty {name}")
            object.__setattr__(self, name, v)


def implication_edges(p: Program, m: Model | None = None) -> list[RelEdge]:
    """``body -> head`` (horn) or ``premise -> consequent`` (dual) edges.

    Reserved atoms are skipped; with a model, both ends must be in it.
    """
    t = p.symbols.text
    keep = None if m is None else m.true_atoms
    out = []
    for c in p.clauses:
        if isinstance(c, HornClause):
            pairs = ((b, c.head) for b in c.body)
        else:
            pairs = ((c.premise, x) for x in c.consequents)
        for src, dst in pairs:
            if src in (TRUE_ID, FALSE_ID) or dst in (TRUE_ID, FALSE_ID):
                continue
            if keep is not None and (src not in keep or dst not in keep):
                continue
            out.append(RelEdge(t(src), IMPLIES, t(dst)))
    return out


_IS_QUOTED = re.compile(r"""^(['"])(.+?)\1\s+is\s+(?:an?\s+)?(['"])(.+?)\3\.?$""")
_IS_PLAIN = re.compile(r"^(.+?)\s+is\s+(?:an?\s+)?(.+?)\.?$")


def parse_generalizations(text: str) -> tuple[list[RelEdge], int]:
    """Parse ``X is Y`` lines; returns the edges and the number of skipped lines."""
    edges, skipped = [], 0
    for line in text.splitlines():
        s = re.sub(r"^\s*(?:[-*•]+|\d+[.)])\s*", "", line).strip()
        if not s:
            continue
        m = _IS_QUOTED.match(s)
        if m:
            x, y = m.group(2).strip(), m.group(4).strip()
        else:
            m = _IS_PLAIN.match(s)
            if not m:
                skipped += 1
                continue
            x, y = m.group(1).strip(" '\""), m.group(2).strip(" '\"")
        if x and y:
            edges.append(RelEdge(x, IS_A, y))
        else:
            skipped += 1
    return edges, skipped


def generalization_edges(atoms: Sequence[str], oracle: Oracle, batch_size: int = 20) -> list[RelEdge]:
    """Ask the oracle for one generalization per atom, ``batch_size`` atoms per request."""
    edges: list[RelEdge] = []
    for i in range(0, len(atoms), batch_size):
        batch = list(atoms[i:i + batch_size])
        resp = oracle.ask(OracleRequest(Purpose.GENERALIZE, "\n".join(batch)))
        got, skipped = parse_generalizations(resp.raw or "\n".join(resp.items))
        if skipped:
            log.warning("skipped %d unparseable generalization lines", skipped)
        edges.extend(got)
    return edges


def parse_svo(text: str) -> tuple[list[SVOTriple], int]:
    triples, skipped = [], 0
    for line in parse_items(text):
        parts = [x.strip() for x in line.split("|")]
        if len(parts) == 3 and all(parts):
            triples.append(SVOTriple(*parts))
        else:
            skipped += 1
    return triples, skipped


def svo_triples(sentence: str, oracle: Oracle) -> list[SVOTriple]:
    resp = oracle.ask(OracleRequest(Purpose.SVO, sentence))
    triples, skipped = parse_svo(resp.raw or "\n".join(resp.items))
    if skipped:
        log.warning("skipped %d malformed SVO lines", skipped)
    return triples


def svo_edges(triples: Iterable[SVOTriple]) -> list[RelEdge]:
    return [RelEdge(t.subject, t.verb, t.object) for t in triples]


def triples_to_json(triples: Iterable[SVOTriple]) -> str:
    return json.dumps([asdict(t) for t in triples], ensure_ascii=False)


def triples_from_json(text: str) -> list[SVOTriple]:
    return [SVOTriple(**d) for d in json.loads(text)]


def _nodes(edges: Sequence[RelEdge]) -> list[str]:
    seen: dict[str, None] = {}
    for e in edges:
        seen.setdefault(e.source)
        seen.setdefault(e.target)
    return list(seen)


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def export_graph(edges: Sequence[RelEdge], fmt: str = "dot") -> str:
    if fmt == "dot":
        lines = ["digraph relations {"]
        lines += [f"  {_dot_quote(n)};" for n in _nodes(edges)]
        lines += [f"  {_dot_quote(e.source)} -> {_dot_quote(e.target)} [label={_dot_quote(e.label)}];"
                  for e in edges]
        lines.append("}")
        return "\n".join(lines) + "\n"
    if fmt == "json":
        d = {"nodes": _nodes(edges), "edges": [asdict(e) for e in edges]}
        return json.dumps(d, indent=1, ensure_ascii=False) + "\n"
    raise ValueError(f"unknown graph format {fmt!r}")


def edges_from_json(text: str) -> list[RelEdge]:
    return [RelEdge(**e) for e in json.loads(text)["edges"]]

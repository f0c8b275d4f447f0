"""Question/answer trees grown from follow-up questions, compiled to a DCG.

Every answered node ``qi`` with answer ``aj`` yields one rule per answered
child ``qk``::

    qi-->qi_,aj_,qk.

and an answered node without answered children yields ``qi-->qi_,aj_.``.
Questions reached at the depth limit stay open and are collected in
``opens/2`` with their number of occurrences over the whole tree.  The
grammar is a tree, hence loop-free, and generates a finite language.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator

from .oracles import Oracle, OracleError, OracleRequest, Purpose

DRIVER = "go:-q0(Xs,[]),nl,member(X,Xs),write(X),nl,nl,fail."


def clean_text(text: str) -> str:
    """Collapse internal whitespace (including newlines) to single spaces."""
    return " ".join(text.split())


@dataclass
class QANode:
    question: str
    answer: str | None = None
    children: list["QANode"] = field(default_factory=list)
    depth: int = 0

    @property
    def is_open(self) -> bool:
        return self.answer is None

    def walk(self) -> Iterator["QANode"]:
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass
class QATree:
    root: QANode
    opens: dict[str, int] = field(default_factory=dict)
    repeated_answers: list[tuple[str, str]] = field(default_factory=list)
    dropped_questions: list[str] = field(default_factory=list)


class QATreeError(RuntimeError):
    def __init__(self, message: str, tree: QATree):
        super().__init__(message)
        self.tree = tree


def build_qatree(initiator: str, depth: int, oracle: Oracle, max_branching: int = 5) -> QATree:
    """Grow the follow-up tree of ``initiator`` down to ``depth``.

    A follow-up repeating a question on its own path is dropped.  A follow-up
    whose answer repeats an answer on its path is cut from the tree and the
    pair goes to ``repeated_answers``.  Nodes at the depth limit stay open.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    root = QANode(clean_text(initiator))
    tree = QATree(root)

    def ask(purpose: Purpose, goal: str, path: tuple[str, ...], **params):
        try:
            return oracle.ask(OracleRequest(purpose, goal, path, params))
        except OracleError as e:
            raise QATreeError(f"oracle failure on {goal!r}: {e}", tree) from e

    def open_node(node: QANode) -> None:
        tree.opens[node.question] = tree.opens.get(node.question, 0) + 1

    def answer_of(node: QANode, qpath: tuple[str, ...]) -> str:
        resp = ask(Purpose.ANSWER, node.question, qpath)
        return clean_text(" ".join(resp.items))

    def grow(node: QANode, qpath: tuple[str, ...], apath: tuple[str, ...]) -> None:
        resp = ask(Purpose.FOLLOWUPS, node.question, qpath,
                   answer=node.answer, branching=str(max_branching))
        here = qpath + (node.question,)
        seen_local: set[str] = set()
        for raw in resp.items[:max_branching]:
            q = clean_text(raw)
            if not q or q in seen_local:
                continue
            seen_local.add(q)
            if q in here:
                tree.dropped_questions.append(q)
                continue
            child = QANode(q, depth=node.depth + 1)
            if child.depth >= depth:
                node.children.append(child)
                open_node(child)
                continue
            ans = answer_of(child, here)
            if ans in apath or ans == node.answer:
                tree.repeated_answers.append((q, ans))
                continue
            child.answer = ans
            node.children.append(child)
            grow(child, here, apath + (node.answer,))

    if depth == 0:
        open_node(root)
        return tree
    root.answer = answer_of(root, ())
    grow(root, (), ())
    return tree


# ---------------------------------------------------------------- grammar

@dataclass
class DCGGrammar:
    """Rules ``(qi, aj, qk or None)`` plus terminal tables and bookkeeping."""

    rules: list[tuple[int, int, int | None]] = field(default_factory=list)
    questions: dict[int, str] = field(default_factory=dict)
    answers: dict[int, str] = field(default_factory=dict)
    opens: dict[str, int] = field(default_factory=dict)
    repeated_answers: list[tuple[str, str]] = field(default_factory=list)

    def nonterminals(self) -> list[str]:
        return [f"q{i}" for i in sorted(self.questions)]

    def successors(self) -> dict[int, list[tuple[int, int | None]]]:
        out: dict[int, list[tuple[int, int | None]]] = {i: [] for i in self.questions}
        for q, a, k in self.rules:
            out.setdefault(q, []).append((a, k))
        return out


def tree_to_dcg(t: QATree) -> DCGGrammar:
    g = DCGGrammar(opens=dict(t.opens), repeated_answers=list(t.repeated_answers))
    qidx: dict[int, int] = {}
    aidx: dict[str, int] = {}
    for node in t.root.walk():
        if not node.is_open:
            qidx[id(node)] = len(qidx)
            g.questions[qidx[id(node)]] = node.question
            if node.answer not in aidx:
                aidx[node.answer] = len(aidx)
                g.answers[aidx[node.answer]] = node.answer
    for node in t.root.walk():
        if node.is_open:
            continue
        q, a = qidx[id(node)], aidx[node.answer]
        kids = [qidx[id(c)] for c in node.children if not c.is_open]
        if kids:
            g.rules.extend((q, a, k) for k in kids)
        else:
            g.rules.append((q, a, None))
    return g


def _pl_quote(text: str) -> str:
    return "'" + text.replace("\\", "\\\\").replace("'", "\\'") + "'"


def render_dcg(g: DCGGrammar) -> str:
    """Prolog source: rules, terminals, ``opens/2`` facts and the ``go/0`` driver."""
    out = [":-dynamic(opens/2).", ":-dynamic(repeated/2).", ""]
    for q, a, k in g.rules:
        tail = f",q{k}" if k is not None else ""
        out.append(f"q{q}-->q{q}_,a{a}_{tail}.")
    if g.rules:
        out.append("")
    for i in sorted(g.questions):
        out.append(f"q{i}_-->[{_pl_quote('Q: ' + g.questions[i])}].")
    for j in sorted(g.answers):
        out.append(f"a{j}_-->[{_pl_quote('A: ' + g.answers[j])}].")
    if g.questions:
        out.append("")
    for text, n in g.opens.items():
        out.append(f"opens({_pl_quote(text)},{n}).")
    for q, a in g.repeated_answers:
        out.append(f"repeated({_pl_quote(q)},{_pl_quote(a)}).")
    if g.opens or g.repeated_answers:
        out.append("")
    out.append(DRIVER)
    return "\n".join(out) + "\n"


_Q = r"'((?:[^'\\]|\\.)*)'"
_RULE = re.compile(r"^q(\d+)-->q(\d+)_,a(\d+)_(?:,q(\d+))?\.$")
_TERM = re.compile(r"^([qa])(\d+)_-->\[" + _Q + r"\]\.$")
_OPEN = re.compile(r"^opens\(" + _Q + r",(\d+)\)\.$")
_REP = re.compile(r"^repeated\(" + _Q + "," + _Q + r"\)\.$")
_UNESC = re.compile(r"\\(.)")


def _pl_unquote(s: str) -> str:
    return _UNESC.sub(r"\1", s)


def read_dcg(text: str) -> DCGGrammar:
    """Parse the output of :func:`render_dcg` back into a grammar."""
    g = DCGGrammar()
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("%") or line.startswith(":-") or line == DRIVER:
            continue
        if m := _RULE.match(line):
            q, q2, a, k = m.groups()
            if q != q2:
                raise ValueError(f"line {n}: rule for q{q} uses terminal q{q2}_")
            g.rules.append((int(q), int(a), int(k) if k is not None else None))
        elif m := _TERM.match(line):
            kind, i, body = m.groups()
            text_ = _pl_unquote(body)
            prefix = "Q: " if kind == "q" else "A: "
            if not text_.startswith(prefix):
                raise ValueError(f"line {n}: terminal without {prefix!r} prefix")
            (g.questions if kind == "q" else g.answers)[int(i)] = text_[len(prefix):]
        elif m := _OPEN.match(line):
            g.opens[_pl_unquote(m.group(1))] = int(m.group(2))
        elif m := _REP.match(line):
            g.repeated_answers.append((_pl_unquote(m.group(1)), _pl_unquote(m.group(2))))
        else:
            raise ValueError(f"line {n}: unrecognized DCG line {line[:60]!r}")
    return g


def generate_language(g: DCGGrammar, start: int = 0) -> list[list[str]]:
    """All sentences derivable from ``q<start>``, in rule order.

    A sentence alternates ``Q: ...`` and ``A: ...`` terminals.
    """
    succ = g.successors()
    if start not in g.questions:
        return []

    def gen(q: int, active: frozenset[int]) -> Iterator[list[str]]:
        if q in active:
            raise ValueError(f"grammar is cyclic at q{q}")
        head = ["Q: " + g.questions[q]]
        for a, k in succ.get(q, ()):
            pair = head + ["A: " + g.answers[a]]
            if k is None:
                yield pair
            else:
                for rest in gen(k, active | {q}):
                    yield pair + rest

    return list(gen(start, frozenset()))

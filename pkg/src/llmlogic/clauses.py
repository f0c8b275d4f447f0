"""Propositional Horn and Dual-Horn programs: interning, parsing, serialization.

Text syntax::

    'p' :- 'q', r.          % Horn rule
    'r'.                    % Horn fact, stored as r :- true
    a => b ; 'c d'.         % Dual-Horn clause
    'c d' => false.         % Dual-Horn negative fact

Atoms are single-quoted strings (backslash escapes) or identifiers starting
with a lowercase letter.  A program is homogeneous: all Horn or all Dual.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, NamedTuple, Sequence, Union

TRUE = "true"
FALSE = "false"
TRUE_ID = 0
FALSE_ID = 1


class Kind(str, Enum):
    HORN = "horn"
    DUAL = "dual"


class Status(str, Enum):
    SATISFIABLE = "satisfiable"
    UNSATISFIABLE = "unsatisfiable"


class ProgramError(ValueError):
    """Raised on malformed program text or JSON.

    ``line`` and ``column`` are 1-based and point at the offending token
    when the error comes from the text parser.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 source: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        where = f"{line}:{column}: " if line is not None else ""
        if source:
            where = f"{source}:{where or ' '}"
        super().__init__(where + message)


class Atom(NamedTuple):
    id: int
    text: str


class SymbolTable:
    """Bijective text <-> dense id table with ``true``=0 and ``false``=1."""

    __slots__ = ("_ids", "_texts")

    def __init__(self, texts: Iterable[str] = ()):
        self._ids: dict[str, int] = {TRUE: TRUE_ID, FALSE: FALSE_ID}
        self._texts: list[str] = [TRUE, FALSE]
        for t in texts:
            self.intern(t)

    def intern(self, text: str) -> Atom:
        return Atom(self.intern_id(text), text.strip())

    def intern_id(self, text: str) -> int:
        i = self._ids.get(text)
        if i is not None:
            return i
        key = text.strip()
        if not key:
            raise ProgramError("empty atom text")
        i = self._ids.get(key)
        if i is None:
            i = len(self._texts)
            self._texts.append(key)
            self._ids[key] = i
        return i

    def id(self, text: str) -> int:
        """Id of an already interned text; ``KeyError`` if unknown."""
        return self._ids[text.strip()]

    def get(self, text: str) -> int | None:
        return self._ids.get(text.strip())

    def text(self, i: int) -> str:
        return self._texts[i]

    def atom(self, i: int) -> Atom:
        return Atom(i, self._texts[i])

    def __contains__(self, text: object) -> bool:
        return isinstance(text, str) and text.strip() in self._ids

    def __len__(self) -> int:
        return len(self._texts)

    def __iter__(self) -> Iterator[str]:
        return iter(self._texts)

    def texts(self) -> list[str]:
        return list(self._texts)


class HornClause(NamedTuple):
    head: int
    body: tuple[int, ...]


class DualHornClause(NamedTuple):
    premise: int
    consequents: tuple[int, ...]


Clause = Union[HornClause, DualHornClause]


class Program:
    """An immutable homogeneous list of clauses plus its symbol table."""

    __slots__ = ("kind", "clauses", "symbols", "_cache")

    def __init__(self, kind: Kind, clauses: Sequence[Clause], symbols: SymbolTable):
        self.kind = Kind(kind)
        self.clauses = tuple(clauses)
        self.symbols = symbols
        self._cache: dict = {}

    @classmethod
    def horn(cls, clauses: Iterable[tuple[str, Sequence[str]]],
             symbols: SymbolTable | None = None) -> "Program":
        """Build a Horn program from ``(head, [body...])`` text pairs."""
        syms = symbols if symbols is not None else SymbolTable()
        intern = syms.intern_id
        out = []
        for head, body in clauses:
            h = intern(head)
            b = tuple(intern(x) for x in body) if body else (TRUE_ID,)
            out.append(HornClause(h, b))
        p = cls(Kind.HORN, out, syms)
        p.validate()
        return p

    @classmethod
    def dual(cls, clauses: Iterable[tuple[str, Sequence[str]]],
             symbols: SymbolTable | None = None) -> "Program":
        """Build a Dual-Horn program from ``(premise, [consequents...])`` pairs."""
        syms = symbols if symbols is not None else SymbolTable()
        intern = syms.intern_id
        out = [DualHornClause(intern(p), tuple(intern(c) for c in cs)) for p, cs in clauses]
        prog = cls(Kind.DUAL, out, syms)
        prog.validate()
        return prog

    def validate(self) -> None:
        n = len(self.symbols)
        for c in self.clauses:
            if self.kind is Kind.HORN:
                if not isinstance(c, HornClause):
                    raise ProgramError("mixed clause kinds in a horn program")
                if c.head == TRUE_ID:
                    raise ProgramError("'true' cannot be a clause head")
                if not c.body:
                    raise ProgramError("empty clause body")
                atoms = (c.head, *c.body)
            else:
                if not isinstance(c, DualHornClause):
                    raise ProgramError("mixed clause kinds in a dual program")
                if c.premise == FALSE_ID:
                    raise ProgramError("'false' cannot be a premise")
                if not c.consequents:
                    raise ProgramError("empty consequent list")
                atoms = (c.premise, *c.consequents)
            for a in atoms:
                if not 0 <= a < n:
                    raise ProgramError(f"atom id {a} not in symbol table")

    def text(self, i: int) -> str:
        return self.symbols.text(i)

    def structure(self) -> tuple:
        """Clause structure by atom text, independent of id assignment."""
        t = self.symbols.text
        return (self.kind.value,
                tuple((t(c[0]), tuple(t(x) for x in c[1])) for c in self.clauses))

    def __len__(self) -> int:
        return len(self.clauses)

    def __repr__(self) -> str:
        return f"Program(kind={self.kind.value}, clauses={len(self.clauses)}, atoms={len(self.symbols)})"


@dataclass
class Model:
    """Result of a minimal-model computation.

    ``true_atoms`` holds the non-reserved atom ids of the model.  The reserved
    atoms are implicit: ``true`` always holds, ``false`` holds iff the status is
    unsatisfiable; ``in`` answers for them accordingly.
    """

    true_atoms: frozenset[int]
    status: Status
    symbols: SymbolTable = field(repr=False, compare=False)
    proved_goal: int | None = None
    _ordered: list[int] | None = field(default=None, repr=False, compare=False)

    @property
    def satisfiable(self) -> bool:
        return self.status is Status.SATISFIABLE

    def __contains__(self, atom: object) -> bool:
        if isinstance(atom, str):
            i = self.symbols.get(atom)
            if i is None:
                return False
        elif isinstance(atom, Atom):
            i = atom.id
        else:
            i = atom
        if i == TRUE_ID:
            return True
        if i == FALSE_ID:
            return self.status is Status.UNSATISFIABLE
        return i in self.true_atoms

    def ids(self) -> list[int]:
        """Non-reserved model atoms in ascending intern id."""
        if self._ordered is None:
            self._ordered = sorted(self.true_atoms)
        return self._ordered

    def names(self) -> list[str]:
        t = self.symbols.text
        return [t(i) for i in self.ids()]


# ---------------------------------------------------------------- text parser

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<quoted>'(?:[^'\\\n]|\\.)*')
  | (?P<open_quote>')
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<neck>:-)
  | (?P<arrow>=>)
  | (?P<comma>,)
  | (?P<semi>;)
  | (?P<dot>\.)
""", re.VERBOSE)

_UNESCAPE = re.compile(r"\\(.)")
_ESCAPES = {"n": "\n", "t": "\t"}


def _unquote(tok: str) -> str:
    return _UNESCAPE.sub(lambda m: _ESCAPES.get(m.group(1), m.group(1)), tok[1:-1])


def quote(text: str) -> str:
    """Single-quoted canonical form of an atom text."""
    return "'" + (text.replace("\\", "\\\\").replace("'", "\\'")
                  .replace("\n", "\\n").replace("\t", "\\t")) + "'"


class _Tok(NamedTuple):
    kind: str
    value: str
    line: int
    col: int


def _tokenize(text: str) -> Iterator[_Tok]:
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ProgramError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "open_quote":
            raise ProgramError("unterminated quoted atom", line, col)
        val = m.group()
        if kind == "quoted":
            yield _Tok("atom", _unquote(val), line, col)
        elif kind == "ident":
            yield _Tok("atom", val, line, col)
        elif kind not in ("ws", "comment"):
            yield _Tok(kind, val, line, col)
        nl = val.count("\n")
        if nl:
            line += nl
            line_start = pos + val.rindex("\n") + 1
        pos = m.end()
    yield _Tok("eof", "", line, pos - line_start + 1)


def parse_program(text: str, kind_hint: Kind | str | None = None) -> Program:
    """Parse clause text into a :class:`Program`.

    The kind is taken from the first connective unless ``kind_hint`` forces
    it.  Every error is a :class:`ProgramError` carrying line and column.
    """
    hint = Kind(kind_hint) if kind_hint is not None else None
    kind = hint
    syms = SymbolTable()
    intern = syms.intern_id
    clauses: list[Clause] = []
    toks = _tokenize(text)
    tok = next(toks)

    def fail(msg: str, t: _Tok) -> ProgramError:
        return ProgramError(msg, t.line, t.col)

    def set_kind(k: Kind, t: _Tok) -> None:
        nonlocal kind
        if kind is None:
            kind = k
        elif kind is not k:
            if hint is not None:
                raise fail(f"{k.value} clause in a program forced to {hint.value}", t)
            raise fail("mixed connectives: ':-' and '=>' in one program", t)

    while tok.kind != "eof":
        if tok.kind != "atom":
            raise fail(f"expected an atom, got {tok.value!r}", tok)
        first = tok
        try:
            head = intern(tok.value)
        except ProgramError as e:
            raise fail(e.message, tok) from None
        tok = next(toks)
        if tok.kind == "dot":
            set_kind(Kind.HORN, first)
            if head == TRUE_ID:
                raise fail("'true' cannot be a clause head", first)
            clauses.append(HornClause(head, (TRUE_ID,)))
            tok = next(toks)
            continue
        if tok.kind not in ("neck", "arrow"):
            if tok.kind == "eof":
                raise fail("missing final '.'", tok)
            raise fail(f"expected ':-', '=>' or '.', got {tok.value!r}", tok)
        conn = tok
        is_horn = conn.kind == "neck"
        set_kind(Kind.HORN if is_horn else Kind.DUAL, conn)
        sep = "comma" if is_horn else "semi"
        body: list[int] = []
        while True:
            tok = next(toks)
            if tok.kind != "atom":
                if tok.kind == "eof":
                    raise fail("missing final '.'", tok)
                raise fail(f"expected an atom, got {tok.value!r}", tok)
            try:
                body.append(intern(tok.value))
            except ProgramError as e:
                raise fail(e.message, tok) from None
            tok = next(toks)
            if tok.kind == sep:
                continue
            if tok.kind == "dot":
                break
            if tok.kind in ("neck", "arrow"):
                raise fail("clause with both ':-' and '=>'", tok)
            if tok.kind in ("comma", "semi"):
                raise fail(f"unexpected {tok.value!r} in a {'horn' if is_horn else 'dual'} clause", tok)
            if tok.kind == "eof":
                raise fail("missing final '.'", tok)
            raise fail(f"expected {',' if is_horn else ';'} or '.', got {tok.value!r}", tok)
        if is_horn:
            if head == TRUE_ID:
                raise fail("'true' cannot be a clause head", first)
            clauses.append(HornClause(head, tuple(body)))
        else:
            if head == FALSE_ID:
                raise fail("'false' cannot be a premise", first)
            clauses.append(DualHornClause(head, tuple(body)))
        tok = next(toks)

    if not clauses:
        raise ProgramError("empty program", 1, 1)
    return Program(kind, clauses, syms)


def load_json_program(text: str) -> Program:
    """Read ``[[head, [b1, ..., bk]], ...]`` into a Horn program."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProgramError(f"malformed JSON: {e.msg}", e.lineno, e.colno) from None
    if not isinstance(data, list):
        raise ProgramError("JSON program must be a list of [head, body] entries")
    if not data:
        raise ProgramError("empty program")
    syms = SymbolTable()
    intern = syms.intern_id
    clauses = []
    for n, entry in enumerate(data):
        if not (isinstance(entry, list) and len(entry) == 2 and isinstance(entry[1], list)):
            raise ProgramError(f"entry {n}: expected [head, [body...]]")
        head, body = entry
        if not isinstance(head, str) or not all(isinstance(b, str) for b in body):
            raise ProgramError(f"entry {n}: atoms must be strings")
        if not body:
            raise ProgramError(f"entry {n}: empty body")
        h = intern(head)
        if h == TRUE_ID:
            raise ProgramError(f"entry {n}: 'true' cannot be a clause head")
        clauses.append(HornClause(h, tuple(intern(b) for b in body)))
    return Program(Kind.HORN, clauses, syms)


def dump_json_program(p: Program) -> str:
    if p.kind is not Kind.HORN:
        raise ProgramError("only horn programs have a JSON form")
    t = p.symbols.text
    return json.dumps([[t(c.head), [t(b) for b in c.body]] for c in p.clauses],
                      ensure_ascii=False) + "\n"


def serialize_clause(p: Program, c: Clause) -> str:
    t = p.symbols.text
    if isinstance(c, HornClause):
        return f"{quote(t(c.head))} :- {', '.join(quote(t(b)) for b in c.body)}."
    return f"{quote(t(c.premise))} => {'; '.join(quote(t(x)) for x in c.consequents)}."


def serialize_program(p: Program) -> str:
    """Canonical text, one clause per line, every atom quoted."""
    return "".join(serialize_clause(p, c) + "\n" for c in p.clauses)


def read_program_file(path) -> Program:
    """Load ``.json`` programs with the JSON reader, anything else as text."""
    from pathlib import Path

    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() == ".json":
            return load_json_program(text)
        return parse_program(text)
    except ProgramError as e:
        raise ProgramError(e.message, e.line, e.column, str(path)) from None

"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 input parse error, 3 oracle failure,
4 unsatisfiable program under ``--strict``.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
from pathlib import Path

from . import __version__, kernels
from .clauses import Kind, ProgramError, Status, read_program_file, serialize_program

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_ORACLE, EXIT_UNSAT = 0, 1, 2, 3, 4

log = logging.getLogger("llmlogic")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _oracle(args):
    from .oracles import make_oracle

    kw = {"temperature": args.temperature}
    if args.llm_model:
        kw["model"] = args.llm_model
    if args.base_url:
        kw["base_url"] = args.base_url
    return make_oracle(args.oracle, **kw)


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- subcommands

def cmd_solve(args) -> int:
    from .solve import horn_model, model_atoms

    p = read_program_file(args.program)
    if args.goal is not None:
        if p.kind is Kind.DUAL:
            from .dual import falsify
            ok = falsify(p, args.goal)
        else:
            if args.goal not in p.symbols:
                raise ProgramError(f"unknown goal atom {args.goal!r}")
            ok = args.goal in horn_model(p, args.engine, goal=args.goal if args.engine == "fixpoint" else None)
        print("true" if ok else "false")
        return EXIT_OK
    atoms, status = model_atoms(p, args.engine, args.strict)
    if status is Status.UNSATISFIABLE:
        print("% unsatisfiable: an integrity constraint fired", file=sys.stderr)
        if args.strict:
            return EXIT_UNSAT
    sys.stdout.write("".join(a + "\n" for a in atoms))
    return EXIT_OK


def cmd_compile_dual(args) -> int:
    from .dual import contrapose

    p = read_program_file(args.input)
    if p.kind is not Kind.DUAL:
        raise ProgramError(f"{args.input}: not a dual program")
    horn, _ = contrapose(p)
    _write(serialize_program(horn), args.output)
    return EXIT_OK


def cmd_explore(args) -> int:
    from .explore import ExplorationConfig, explore, save_artifacts, slug

    cfg = ExplorationConfig(args.goal, args.depth, Kind(args.mode), args.agent,
                            args.threshold, args.branching, args.disjunctive)
    program, trace = explore(cfg, _oracle(args))
    paths = save_artifacts(program, trace, args.output, args.stem or slug(args.goal), args.engine)
    for path in paths.values():
        print(path)
    return EXIT_OK


def cmd_dcg(args) -> int:
    from .dcg import build_qatree, render_dcg, tree_to_dcg

    tree = build_qatree(args.question, args.depth, _oracle(args), args.branching)
    _write(render_dcg(tree_to_dcg(tree)), args.output)
    return EXIT_OK


def cmd_dcg_generate(args) -> int:
    from .dcg import generate_language, read_dcg

    try:
        g = read_dcg(Path(args.grammar).read_text(encoding="utf-8"))
    except ValueError as e:
        raise ProgramError(str(e)) from None
    for sentence in generate_language(g):
        sys.stdout.write("\n".join(sentence) + "\n\n")
    return EXIT_OK


def cmd_soft(args) -> int:
    from .softstore import (AbducedLedger, SentenceStore, SoftQuery, export_abduced,
                            make_backend, soft_unify)

    if args.soft_cmd == "add":
        stem = args.store
        spath, _ = SentenceStore.paths(stem)
        backend = make_backend(args.backend) if args.backend else None
        if spath.exists():
            store = SentenceStore.load(stem, backend)
        else:
            store = SentenceStore(backend or make_backend("hashing-256"))
        lines = Path(args.textfile).read_text(encoding="utf-8").splitlines()
        texts = [x for x in lines if x.strip()]
        if not texts:
            raise ProgramError(f"{args.textfile}: no sentences")
        added = store.add_sentences(texts)
        store.save(stem)
        print(f"added {added}, store size {len(store)}")
        return EXIT_OK
    if args.soft_cmd == "query":
        store = SentenceStore.load(args.store)
        ledger = AbducedLedger.load(args.ledger) if args.ledger else AbducedLedger()
        for sent in soft_unify(store, ledger, SoftQuery(args.q, args.knn, args.threshold)):
            print(sent)
        if args.ledger:
            ledger.save(args.ledger)
        return EXIT_OK
    if args.soft_cmd == "export":
        ledger = AbducedLedger.load(args.ledger)
        program, annotated = export_abduced(ledger)
        _write(serialize_program(program), args.output)
        if args.annotated:
            Path(args.annotated).write_text(annotated, encoding="utf-8")
        return EXIT_OK
    raise UsageError("soft needs a subcommand: add, query or export")


def cmd_graph(args) -> int:
    from .relgraph import export_graph, generalization_edges, implication_edges

    p = read_program_file(args.program)
    m = None
    if args.model:
        if p.kind is Kind.DUAL:
            from .clauses import Model
            from .dual import falsified_atoms
            m = Model(frozenset(falsified_atoms(p)), Status.SATISFIABLE, p.symbols)
        else:
            from .solve import horn_model
            m = horn_model(p, args.engine)
    edges = implication_edges(p, m)
    if args.generalize:
        atoms = list(dict.fromkeys(x for e in edges for x in (e.source, e.target)))
        edges += generalization_edges(atoms, _oracle(args))
    _write(export_graph(edges, args.format), args.output)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    oracle_opts = _Parser(add_help=False)
    g = oracle_opts.add_argument_group("oracle")
    g.add_argument("--oracle", default="live", metavar="live|replay:<file>|capture:<file>",
                   help="oracle to use (default: live endpoint from LLMLOGIC_BASE_URL / LLMLOGIC_API_KEY)")
    g.add_argument("--llm-model", help="model name for the live endpoint (env LLMLOGIC_MODEL)")
    g.add_argument("--base-url", help="base URL of the OpenAI-compatible endpoint")
    g.add_argument("--temperature", type=float, default=0.0, help="sampling temperature (default 0)")

    engine_opt = _Parser(add_help=False)
    engine_opt.add_argument("--engine", choices=["fixpoint", "matrix"], default="fixpoint",
                            help="model builder (default fixpoint)")

    ap = _Parser(prog="llmlogic", description="LLM-elicited propositional logic programs: solve, compile, explore, DCG, soft unification, relation graphs.",
                 epilog="Environment: LLMLOGIC_API_KEY (or OPENAI_API_KEY), LLMLOGIC_BASE_URL, LLMLOGIC_MODEL. "
                        "Exit codes: 0 ok, 1 usage, 2 input parse error, 3 oracle failure, 4 unsatisfiable with --strict.")
    ap.add_argument("--version", action="version",
                    version=f"llmlogic {__version__} ({kernels.BACKEND} kernels)")
    ap.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized tooling")
    sub = ap.add_subparsers(dest="cmd", parser_class=_Parser, metavar="command")

    s = sub.add_parser("solve", parents=[engine_opt], help="compute the minimal model of a program")
    s.add_argument("program", help=".pro (text) or .json program")
    s.add_argument("--strict", action="store_true",
                   help="discard the model and exit 4 when an integrity constraint fires")
    s.add_argument("--goal", help="only report whether this atom is proved (falsified, for dual programs)")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("compile-dual", help="compile a dual program to its definite falsification program")
    s.add_argument("input")
    s.add_argument("-o", "--output", help="output file (default stdout)")
    s.set_defaults(func=cmd_compile_dual)

    s = sub.add_parser("explore", parents=[oracle_opts, engine_opt],
                       help="expand a goal through the oracle into a logic program")
    s.add_argument("--goal", required=True, help="initiator goal text")
    s.add_argument("--depth", type=int, default=1, help="maximum expansion depth")
    s.add_argument("--mode", choices=["horn", "dual"], default="horn")
    s.add_argument("--agent", choices=["recursor", "advisor", "rater"], default="recursor")
    s.add_argument("--threshold", type=float, default=70.0, help="rater acceptance threshold 0-100")
    s.add_argument("--branching", type=int, default=5, help="maximum items per expansion")
    s.add_argument("--disjunctive", action="store_true",
                   help="horn mode: one clause per item instead of one conjunctive clause")
    s.add_argument("--stem", help="base name of the output files (default: slug of the goal)")
    s.add_argument("-o", "--output", required=True, help="output directory")
    s.set_defaults(func=cmd_explore)

    s = sub.add_parser("dcg", parents=[oracle_opts], help="build a follow-up question tree and its DCG")
    s.add_argument("--question", required=True)
    s.add_argument("--depth", type=int, default=2)
    s.add_argument("--branching", type=int, default=5)
    s.add_argument("-o", "--output", help="output .pl file (default stdout)")
    s.set_defaults(func=cmd_dcg)

    s = sub.add_parser("dcg-generate", help="enumerate the language of a generated DCG file")
    s.add_argument("grammar")
    s.set_defaults(func=cmd_dcg_generate)

    s = sub.add_parser("soft", help="sentence store, soft unification and abduction")
    soft = s.add_subparsers(dest="soft_cmd", parser_class=_Parser, metavar="add|query|export")
    a = soft.add_parser("add", help="add the lines of a text file to a store")
    a.add_argument("store", help="store path stem")
    a.add_argument("textfile")
    a.add_argument("--backend", help="embedding backend: hashing-256 (default) or http:<model>")
    a = soft.add_parser("query", help="soft-unify a query against a store")
    a.add_argument("store")
    a.add_argument("--q", required=True, help="query text")
    a.add_argument("--knn", type=int, default=3, help="neighbours to consider")
    a.add_argument("--threshold", type=int, default=70, help="distance bound in percent")
    a.add_argument("--ledger", help="abduced-clause ledger to update")
    a = soft.add_parser("export", help="export a ledger as a Horn program")
    a.add_argument("ledger")
    a.add_argument("-o", "--output")
    a.add_argument("--annotated", help="also write the probability-annotated clauses here")
    s.set_defaults(func=cmd_soft)

    s = sub.add_parser("graph", parents=[oracle_opts, engine_opt], help="export a relation graph")
    s.add_argument("program")
    s.add_argument("--model", action="store_true", help="keep only edges inside the minimal model")
    s.add_argument("--generalize", action="store_true", help="add 'is' edges from the oracle")
    s.add_argument("--format", choices=["dot", "json"], default="dot")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_graph)
    return ap


def main(argv: list[str] | None = None) -> int:
    from .dcg import QATreeError
    from .explore import ExplorationError
    from .oracles import OracleError
    from .softstore import EmbeddingError, StoreError

    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except UsageError as e:
        print(f"llmlogic: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:   # --help / --version
        return int(e.code or 0)
    if not getattr(args, "func", None):
        ap.print_help(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    random.seed(args.seed)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"llmlogic: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ProgramError, FileNotFoundError, UnicodeDecodeError, KeyError) as e:
        print(f"llmlogic: input error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (OracleError, ExplorationError, QATreeError, EmbeddingError) as e:
        print(f"llmlogic: oracle failure: {e}", file=sys.stderr)
        return EXIT_ORACLE
    except StoreError as e:
        print(f"llmlogic: store error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as e:
        print(f"llmlogic: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

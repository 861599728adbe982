"""Command-line entry point: ``verblex <command> [options]``.

Exit status: 0 on success, 1 when the input is well formed but the domain
says no (no parse, invalid ablation case, unknown word), 2 for unreadable or
malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .corpus import Corpus
from .defparser import DefinitionError, parse_definition, parse_text
from .evaluation import (InvalidCase, ablate_roles, ablate_templates, load_cases,
                         load_judgements, sim_eval)
from .inference import FactSyntaxError, entails, parse_fact, parse_facts
from .learner import bootstrap, induce_constraints
from .logic import TermSyntaxError
from .mapping import DEPTH_MODEL, Hierarchy, Unresolvable, detect_duplicates
from .model import Resource, ResourceError, type_id
from .resource_io import dumps, format_type, load_corpus, load_resource, save_resource, summarize

OK, REJECTED, BAD_INPUT = 0, 1, 2


def data_path(name: str) -> Path:
    return Path(str(resources.files("verblex") / "data" / name))


class _Fail(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def _resource(args) -> Resource:
    return load_resource(args.seed or data_path("seed"))


def _corpus(args) -> Corpus:
    return load_corpus(args.corpus or data_path("corpus.json"))


def _emit(text: str, out) -> None:
    out.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# Commands


def cmd_build(args, out) -> int:
    if args.max_iterations < 1 or args.jobs < 1:
        raise _Fail(BAD_INPUT, "--max-iterations and --jobs must be positive")
    if not args.out:
        raise _Fail(BAD_INPUT, "build needs --out DIR")
    seed, corpus = _resource(args), _corpus(args)
    built, report = bootstrap(corpus, seed, args.max_iterations, args.jobs)
    outdir = Path(args.out)
    save_resource(built, outdir)
    data = report.as_dict()
    data["depth_model"] = DEPTH_MODEL
    report_path = Path(args.report) if args.report else outdir / "report.json"
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(dumps(data), encoding="utf-8")
    _emit(report.summary(), out)
    return OK


def cmd_query_type(args, out) -> int:
    r = _resource(args)
    try:
        t = type_id(args.type)
    except ResourceError as exc:
        raise _Fail(BAD_INPUT, str(exc)) from None
    if t not in r.ontology:
        raise _Fail(REJECTED, f"unknown type {t}")
    _emit(format_type(r, t), out)
    return OK


def cmd_similarity(args, out) -> int:
    h = Hierarchy(_resource(args), _corpus(args))
    try:
        score, pair = h.word_similarity(args.word1, args.word2)
    except Unresolvable as exc:
        raise _Fail(REJECTED, str(exc)) from None
    _emit(f"{score:.4f}\t{pair[0]}\t{pair[1]}", out)
    return OK


def cmd_entail(args, out) -> int:
    r = _resource(args)
    if args.max_depth < 1:
        raise _Fail(BAD_INPUT, "--max-depth must be positive")
    try:
        facts = parse_facts(Path(args.facts).read_text(encoding="utf-8"))
        query = parse_fact(args.query)
    except FactSyntaxError as exc:
        raise _Fail(BAD_INPUT, f"{args.facts}: {exc}") from None
    for f in facts + [query]:
        r.get(f.type)
    ok, trace = entails(facts, query, r.axioms.values(), r, args.max_depth)
    lines = ["yes" if ok else "unknown"]
    for step in trace:
        lines.append(f"  [{step.depth}] {step.premise}  --{step.axiom}-->  {step.fact}")
    _emit("\n".join(lines), out)
    return OK


def cmd_parse_gloss(args, out) -> int:
    r = _resource(args)
    corpus = _corpus(args)
    h = Hierarchy(r, corpus)
    context = None
    try:
        if args.synset:
            synset = corpus.get(args.synset)
            constraints = induce_constraints(synset.id, h)
            context = constraints.role_names if constraints else None
            defs = synset.definitions()
            if not defs:
                raise _Fail(REJECTED, f"{synset.id} has an empty gloss")
            graphs = parse_definition(defs[0], r, h, context)
        elif args.gloss:
            graphs = parse_text(args.gloss, r, h, context)
        else:
            raise _Fail(BAD_INPUT, "give a gloss or --synset ID")
    except DefinitionError as exc:
        raise _Fail(REJECTED, str(exc)) from None
    chunks = []
    for i, g in enumerate(graphs[:args.top], 1):
        chunks.append(f"; analysis {i} of {len(graphs)}\n{g.render()}")
    _emit("\n\n".join(chunks), out)
    return OK


def _eval_ablation(args, out, driver) -> int:
    r, corpus = _resource(args), _corpus(args)
    try:
        cases = load_cases(args.cases or data_path("cases.json"))
        for case in cases:
            corpus.get(case.synset)
        result = driver(r, corpus, cases)
    except InvalidCase as exc:
        raise _Fail(REJECTED, str(exc)) from None
    except (KeyError, TypeError) as exc:
        raise _Fail(BAD_INPUT, f"malformed case file: {exc}") from None
    _emit(dumps(result), out)
    return OK


def cmd_eval_roles(args, out) -> int:
    return _eval_ablation(args, out, ablate_roles)


def cmd_eval_templates(args, out) -> int:
    return _eval_ablation(args, out, ablate_templates)


def cmd_eval_sim(args, out) -> int:
    h = Hierarchy(_resource(args), _corpus(args))
    judgements = load_judgements(args.judgements or data_path("judgements.tsv"))
    try:
        result = sim_eval(h, judgements)
    except ValueError as exc:
        raise _Fail(REJECTED, str(exc)) from None
    result["depth_model"] = DEPTH_MODEL
    _emit(dumps(result), out)
    return OK


def cmd_summarize(args, out) -> int:
    _emit(dumps(summarize(_resource(args))), out)
    return OK


def cmd_validate(args, out) -> int:
    r = _resource(args)
    lines = [f"resource ok: {len(r.ontology)} types, {len(r.lexicon)} lexical entries, "
             f"{len(r.axioms)} axioms, {len(r.mappings)} mappings"]
    for dup in detect_duplicates(r):
        lines.append(f"duplicate mapping: {dup['synset']} -> {', '.join(dup['types'])}")
    if args.corpus:
        corpus = load_corpus(args.corpus)
        lines.append(f"corpus ok: {len(corpus)} synsets")
    _emit("\n".join(lines), out)
    return OK


COMMANDS = {
    "build": cmd_build, "query-type": cmd_query_type, "similarity": cmd_similarity,
    "entail": cmd_entail, "parse-gloss": cmd_parse_gloss, "eval-roles": cmd_eval_roles,
    "eval-templates": cmd_eval_templates, "eval-sim": cmd_eval_sim,
    "summarize": cmd_summarize, "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", metavar="DIR", help="resource directory (default: bundled seed)")
    common.add_argument("--corpus", metavar="FILE", help="gloss corpus (default: bundled fixture)")

    p = argparse.ArgumentParser(prog="verblex", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    b = sub.add_parser("build", parents=[common], help="bootstrap a resource from a corpus")
    b.add_argument("--out", metavar="DIR", required=True)
    b.add_argument("--max-iterations", type=int, default=3, metavar="N")
    b.add_argument("--jobs", type=int, default=1, metavar="N")
    b.add_argument("--report", metavar="FILE", help="report path (default: OUT/report.json)")

    q = sub.add_parser("query-type", parents=[common], help="show one ontology type")
    q.add_argument("type")

    s = sub.add_parser("similarity", parents=[common], help="WuP similarity of two words")
    s.add_argument("word1")
    s.add_argument("word2")

    e = sub.add_parser("entail", parents=[common], help="forward-chain from facts to a query")
    e.add_argument("--facts", metavar="FILE", required=True)
    e.add_argument("--query", required=True, help='e.g. "ONT::DEAD(b)@AFTER(t)"')
    e.add_argument("--max-depth", type=int, default=8, metavar="N")

    g = sub.add_parser("parse-gloss", parents=[common], help="print ranked logical forms")
    g.add_argument("gloss", nargs="?")
    g.add_argument("--synset", metavar="ID", help="parse this corpus synset's tagged gloss")
    g.add_argument("--top", type=int, default=3, metavar="N")

    for name, helptext in (("eval-roles", "role-set ablation"),
                           ("eval-templates", "template ablation")):
        x = sub.add_parser(name, parents=[common], help=helptext)
        x.add_argument("--cases", metavar="FILE")
    m = sub.add_parser("eval-sim", parents=[common], help="Spearman against judgements")
    m.add_argument("--judgements", metavar="FILE")

    sub.add_parser("summarize", parents=[common], help="resource statistics")
    sub.add_parser("validate", parents=[common], help="check a resource (and corpus)")
    return p


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    try:
        return COMMANDS[args.command](args, out)
    except _Fail as exc:
        err.write(f"verblex {args.command}: {exc}\n")
        return exc.status
    except (ResourceError, TermSyntaxError, FactSyntaxError, OSError,
            json.JSONDecodeError, UnicodeDecodeError) as exc:
        err.write(f"verblex {args.command}: {exc}\n")
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())

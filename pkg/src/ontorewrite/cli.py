"""Command-line entry point wiring the pipeline together.

Exit codes: 0 ok, 1 constraint violation, 2 input error, 3 budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import chase as chase_mod
from . import emit
from .graphs import (build_cover_graph, build_propagation_graph,
                     format_cover_graph, format_propagation_graph)
from .model import ConjunctiveQuery
from .normalize import classify, normalize_tgds, smark
from .parser import ParseError, parse_ontology, parse_query
from .rewriter import (BudgetExhaustedError, RewriteOptions, RewriterContext,
                       xrewrite)
from .parallel import xrewrite_parallel
from .subsume import prune_ucq

OK, CONSTRAINT_VIOLATION, INPUT_ERROR, BUDGET_EXHAUSTED = 0, 1, 2, 3


class InputError(ValueError):
    pass


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load_ontology(path: str):
    return parse_ontology(_read(path))


def _load_query(path: str, arities: dict) -> ConjunctiveQuery:
    text = _read(path)
    try:
        return parse_query(text, arities)
    except ParseError:
        doc = parse_ontology(text)
        if len(doc.queries) != 1:
            raise InputError(f"{path} must contain exactly one query")
        return doc.queries[0]


def _context(doc, args) -> RewriterContext:
    tgds, _, aux = normalize_tgds(doc.tgds)
    return RewriterContext(
        tgds, aux, doc.arities,
        mgu_cache_size=args.mgu_cache, rename_cache_size=args.rename_cache,
        elim_cache_size=args.elim_cache, max_path_length=args.max_path_length)


def _rewrite_options(args) -> RewriteOptions:
    elimination = False if args.no_elimination else None
    return RewriteOptions(elimination=elimination,
                          subsumption=args.subsumption, budget=args.budget)


def cmd_rewrite(args) -> int:
    doc = _load_ontology(args.ontology)
    query = _load_query(args.query, dict(doc.arities))
    ctx = _context(doc, args)

    if args.guarantee_termination:
        verdict = classify(ctx.tgds)
        if not (verdict["linear"] or verdict["multi_linear"] or verdict["sticky"]):
            raise InputError(
                "termination is not guaranteed: the rule set is neither "
                "linear, multi-linear nor sticky; rerun with --budget")

    options = _rewrite_options(args)
    if args.no_parallel:
        result = xrewrite(query, ctx, options)
        queries = result.queries
        if options.subsumption == "tail":
            queries = prune_ucq(queries)
        metrics = result.metrics
        decomposition = None
    else:
        presult = xrewrite_parallel(query, ctx, options, jobs=args.jobs)
        queries = presult.queries
        metrics = presult.metrics
        decomposition = presult.decomposition

    if args.database is not None:
        code = _check_and_evaluate(args, doc, ctx, queries)
        if code != OK:
            return code
    elif args.output == "ucq":
        sys.stdout.write(emit.serialize_ucq(queries))
    elif args.output == "datalog":
        if decomposition is None:
            raise InputError("--output=datalog requires the parallel pipeline "
                             "(drop --no-parallel)")
        comp_ucqs = [r.queries for r in presult.component_results]
        sys.stdout.write(emit.to_datalog(comp_ucqs, decomposition.reconciliation))
    elif args.output == "sql":
        if args.mapping is None:
            raise InputError("--output=sql requires --mapping")
        mapping = emit.SchemaMapping.from_dict(json.loads(_read(args.mapping)))
        sys.stdout.write(emit.to_sql(queries, mapping) + "\n")

    if args.stats:
        sys.stdout.write(emit.stats_report(queries, metrics) + "\n")
    return OK


def _check_and_evaluate(args, doc, ctx, queries) -> int:
    db = parse_ontology(_read(args.database)).facts

    violations = []
    if doc.fds:
        extended = list(db) + chase_mod.materialize_neq(db)
        fd_hit = any(chase_mod.evaluate_cq(q, extended)
                     for q in chase_mod.fd_check_queries(doc.fds, doc.arities))
        if fd_hit:
            for fd, a, b in chase_mod.fd_violations(doc.fds, db):
                violations.append(f"fd violated: {fd} witness {a}, {b}")
    for nc, check in zip(doc.ncs, chase_mod.nc_check_queries(doc.ncs)):
        rewritten = xrewrite(check, ctx, RewriteOptions(elimination=False)).queries
        if chase_mod.evaluate_ucq(rewritten, db):
            violations.append(f"nc violated: {nc}")
    if violations:
        for v in violations:
            sys.stderr.write(v + "\n")
        return CONSTRAINT_VIOLATION

    answers = sorted(chase_mod.evaluate_ucq(queries, db))
    for t in answers:
        sys.stdout.write("(" + ", ".join(term.name for term in t) + ")\n")
    return OK


def cmd_classify(args) -> int:
    doc = _load_ontology(args.ontology)
    tgds, _, _ = normalize_tgds(doc.tgds)
    raw_verdict = classify(doc.tgds)
    norm_verdict = classify(tgds)
    for key in ("linear", "multi_linear", "sticky"):
        sys.stdout.write(f"{key}={str(norm_verdict[key]).lower()}\n")
    if raw_verdict != norm_verdict:
        for key in ("linear", "multi_linear", "sticky"):
            sys.stdout.write(f"raw_{key}={str(raw_verdict[key]).lower()}\n")
    marking = smark(doc.tgds)
    sys.stdout.write("marking:\n")
    for ri, rule in enumerate(doc.tgds):
        names = sorted(v.name for v in marking.marked_vars(ri))
        sys.stdout.write(f"  rule {ri + 1}: {', '.join(names) if names else '-'}\n")
    return OK


def cmd_chase(args) -> int:
    doc = _load_ontology(args.ontology)
    db = parse_ontology(_read(args.database)).facts if args.database else doc.facts
    instance = chase_mod.chase_up_to(db, doc.tgds, args.steps)
    for a in sorted(instance.atoms):
        sys.stdout.write(f"{a}.\n")
    sys.stdout.write(f"% saturated={str(instance.saturated).lower()}\n")
    return OK


def cmd_graph(args) -> int:
    doc = _load_ontology(args.ontology)
    tgds, _, _ = normalize_tgds(doc.tgds)
    pg = build_propagation_graph(tgds, doc.arities)
    sys.stdout.write("propagation graph:\n")
    sys.stdout.write(format_propagation_graph(pg) + "\n")
    if all(len(t.body) == 1 for t in tgds):
        cg = build_cover_graph(tgds, doc.arities, args.max_path_length)
        sys.stdout.write("cover graph:\n")
        sys.stdout.write(format_cover_graph(cg) + "\n")
    return OK


def cmd_eval(args) -> int:
    doc = _load_ontology(args.ontology)
    query = _load_query(args.query, dict(doc.arities))
    db = parse_ontology(_read(args.database)).facts if args.database else doc.facts
    answers, saturated = chase_mod.certain_answers(query, db, doc.tgds, args.steps)
    for t in sorted(answers):
        sys.stdout.write("(" + ", ".join(term.name for term in t) + ")\n")
    sys.stdout.write(f"% saturated={str(saturated).lower()}\n")
    return OK


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ontorewrite",
        description="Compile conjunctive queries over existential-rule "
                    "ontologies into UCQ/Datalog/SQL rewritings.")
    sub = parser.add_subparsers(dest="command", required=True)

    rw = sub.add_parser("rewrite", help="rewrite a query against an ontology")
    rw.add_argument("--ontology", required=True)
    rw.add_argument("--query", required=True)
    rw.add_argument("--database")
    rw.add_argument("--mapping", help="JSON schema mapping for SQL output")
    rw.add_argument("--output", choices=("ucq", "datalog", "sql"), default="ucq")
    rw.add_argument("--subsumption", choices=("none", "tail", "idec", "irew"),
                    default="none")
    rw.add_argument("--no-elimination", action="store_true")
    rw.add_argument("--no-parallel", action="store_true")
    rw.add_argument("--guarantee-termination", action="store_true")
    rw.add_argument("--budget", type=int)
    rw.add_argument("--jobs", type=int)
    rw.add_argument("--stats", action="store_true")
    rw.set_defaults(func=cmd_rewrite)

    cl = sub.add_parser("classify", help="classify the rule set")
    cl.add_argument("--ontology", required=True)
    cl.set_defaults(func=cmd_classify)

    ch = sub.add_parser("chase", help="run the bounded oblivious chase")
    ch.add_argument("--ontology", required=True)
    ch.add_argument("--database")
    ch.add_argument("--steps", type=int, default=1000)
    ch.set_defaults(func=cmd_chase)

    gr = sub.add_parser("graph", help="dump propagation and cover graphs")
    gr.add_argument("--ontology", required=True)
    gr.set_defaults(func=cmd_graph)

    ev = sub.add_parser("eval", help="certain answers via the chase oracle")
    ev.add_argument("--ontology", required=True)
    ev.add_argument("--query", required=True)
    ev.add_argument("--database")
    ev.add_argument("--steps", type=int, default=1000)
    ev.set_defaults(func=cmd_eval)

    for p in (rw, cl, ch, gr, ev):
        p.add_argument("--mgu-cache", type=int, default=4500)
        p.add_argument("--rename-cache", type=int, default=55000)
        p.add_argument("--elim-cache", type=int, default=2000)
        p.add_argument("--max-path-length", type=int)

    return parser


def main(argv=None) -> int:
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExhaustedError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return BUDGET_EXHAUSTED
    except (InputError, ParseError, KeyError, ValueError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())

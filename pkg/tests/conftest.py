"""Shared fixtures: the financial ontology, small pipeline helpers and the
random ontology/query/database generators used by the property suites."""

import pytest

import ontorewrite as ow
from ontorewrite.model import Atom, VAR, const, var
from ontorewrite.parser import RawTGD, parse_ontology, parse_query

FINANCIAL = """
stockPortfolio(X,Y,Z) -> company(X,V,W).
stockPortfolio(X,Y,Z) -> stock(Y,V,W).
listComponent(X,Y) -> finIndex(Y,Z,W).
listComponent(X,Y) -> stock(X,Z,W).
stockPortfolio(X,Y,Z) -> hasStock(Y,X).
hasStock(X,Y) -> stockPortfolio(Y,X,Z).
stock(X,Y,Z) -> stockPortfolio(V,X,W).
stock(X,Y,Z) -> finInstrument(X).
company(X,Y,Z) -> legalPerson(X).
"""

FINANCIAL_QUERY = ("p(A,B,C) :- finInstrument(A), stockPortfolio(B,A,D), "
                   "company(B,E,F), listComponent(A,C), finIndex(C,G,H).")


def pipeline(text):
    """Parse an ontology, normalize it, and build a rewriter context."""
    doc = parse_ontology(text)
    tgds, provenance, aux = ow.normalize_tgds(doc.tgds)
    ctx = ow.RewriterContext(tgds, aux, doc.arities)
    return doc, tgds, ctx


def query(text, doc):
    return parse_query(text, dict(doc.arities))


def canon_set(queries):
    return {ow.canonical_rename(q) for q in queries}


@pytest.fixture
def financial():
    doc, tgds, ctx = pipeline(FINANCIAL)
    q = query(FINANCIAL_QUERY, doc)
    return doc, tgds, ctx, q


# ---------------------------------------------------------------------------
# Random generators (deterministic per seed).

PRED_POOL = [("p1", 1), ("p2", 2), ("p3", 2), ("p4", 3)]
CONSTS = [const(c) for c in "abcd"]


def random_atom(rng, variables, allow_const=0.15):
    pred, arity = rng.choice(PRED_POOL)
    args = []
    for _ in range(arity):
        if rng.random() < allow_const:
            args.append(rng.choice(CONSTS))
        else:
            args.append(rng.choice(variables))
    return Atom(pred, tuple(args))


def random_linear_rules(rng, max_rules=6):
    rules = []
    for _ in range(rng.randint(1, max_rules)):
        body_vars = [var(v) for v in rng.sample(["X", "Y", "Z"], rng.randint(1, 3))]
        body = random_atom(rng, body_vars, allow_const=0.05)
        head_vars = list(body.variables()) or body_vars[:1]
        pool = head_vars + [var("V"), var("W")]
        pred, arity = rng.choice(PRED_POOL)
        head_args = tuple(rng.choice(pool) for _ in range(arity))
        rules.append(RawTGD((body,), (Atom(pred, head_args),)))
    return rules


JOIN_HEAD = ("p5", 2)  # reserved for multi-atom-body rules; occurs in no body


def random_sticky_rules(rng, max_rules=6, max_tries=200):
    """Sticky rule sets on which the rewriting terminates.

    Rules with more than one body atom can pump the rewriting forever when
    their head predicate is re-derivable (the query grows by one body copy
    per step, never isomorphic to an earlier one), so multi-atom bodies get
    the reserved head predicate p5, which appears in no rule body: such atoms
    are rewritten at most once per query occurrence.
    """
    for _ in range(max_tries):
        rules = []
        n = rng.randint(1, max_rules)
        multi_at = rng.randrange(n) if rng.random() < 0.6 else None
        for i in range(n):
            if i == multi_at:
                vars_ = [var(v) for v in "XYZU"[:rng.randint(2, 4)]]
                body = tuple(random_atom(rng, vars_, allow_const=0.0)
                             for _ in range(2))
                body_vars = sorted({t for a in body for t in a.args
                                    if t.kind == VAR}, key=lambda t: t.name)
                pool = body_vars + [var("V")]
                pred, arity = JOIN_HEAD
                head = Atom(pred, tuple(rng.choice(pool) for _ in range(arity)))
                rules.append(RawTGD(body, (head,)))
            else:
                vars_ = [var(v) for v in rng.sample(["X", "Y", "Z"],
                                                    rng.randint(1, 3))]
                body = (random_atom(rng, vars_, allow_const=0.0),)
                body_vars = sorted({t for a in body for t in a.args
                                    if t.kind == VAR}, key=lambda t: t.name)
                pool = body_vars + [var("V")]
                pred, arity = rng.choice(PRED_POOL)
                head = Atom(pred, tuple(rng.choice(pool) for _ in range(arity)))
                rules.append(RawTGD(body, (head,)))
        if ow.is_sticky(rules):
            return rules
    return random_linear_rules(rng, max_rules)  # fallback; linear terminates too


def random_database(rng, max_facts=8, pool=None):
    facts = []
    for _ in range(rng.randint(1, max_facts)):
        pred, arity = rng.choice(pool or PRED_POOL)
        facts.append(Atom(pred, tuple(rng.choice(CONSTS) for _ in range(arity))))
    return list(dict.fromkeys(facts))


def random_query(rng, max_atoms=3, pool=None):
    n = rng.randint(1, max_atoms)
    pool = pool or PRED_POOL
    variables = [var(v) for v in "ABCD"]
    body = []
    for _ in range(n):
        pred, arity = rng.choice(pool)
        args = tuple(rng.choice(CONSTS) if rng.random() < 0.1
                     else rng.choice(variables) for _ in range(arity))
        body.append(Atom(pred, args))
    body_vars = sorted({t for a in body for t in a.args if t.kind == VAR},
                       key=lambda t: t.name)
    k = rng.randint(0, min(2, len(body_vars)))
    head_args = tuple(rng.sample(body_vars, k)) if k else ()
    return ow.make_query("q", head_args, body)


QUERY_POOL = PRED_POOL + [JOIN_HEAD]


def rules_context(rules):
    tgds, _, aux = ow.normalize_tgds(rules)
    arities = {}
    for r in rules:
        for a in r.body + r.head:
            arities.setdefault(a.pred, len(a.args))
    return ow.RewriterContext(tgds, aux, arities)

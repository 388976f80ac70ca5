"""Query subsumption and the pruning modes applied on top of the rewriter:
Tail (exhaustive post-hoc), IDec (per decomposition component, before
unfolding) and IRew (on every admission, inside the rewriter loop)."""

from __future__ import annotations

from typing import List

from .model import Atom, ConjunctiveQuery, canonical_rename, find_homomorphism


def subsumes(q1: ConjunctiveQuery, q2: ConjunctiveQuery) -> bool:
    """q1 subsumes q2 when a homomorphism maps body(q1) into body(q2) and
    head(q1) onto head(q2); q2's answers are then contained in q1's."""
    if q1.head_pred != q2.head_pred or len(q1.head_args) != len(q2.head_args):
        return False
    h1 = Atom(q1.head_pred, q1.head_args)
    h2 = Atom(q2.head_pred, q2.head_args)
    return find_homomorphism(q1.body, q2.body, fixed_head=(h1, h2)) is not None


def _canon_key(q: ConjunctiveQuery):
    c = canonical_rename(q)
    return (c.head_pred, c.head_args, c.body)


def prune_tail_state(state) -> None:
    """Exhaustive subsumption over the final rewriting, through the query
    graph: a subsumed query is removed together with its descendants, except
    that the subsumer survives even when it descends from the subsumed query.
    Equivalent queries keep the one with the smaller canonical form."""
    while True:
        finals = sorted(state.final_entries(), key=lambda e: _canon_key(e.query))
        removed = False
        for winner in finals:
            if winner.pruned:
                continue
            for loser in finals:
                if loser.pruned or loser.node == winner.node:
                    continue
                if subsumes(winner.query, loser.query):
                    # On mutual subsumption the canonical order above makes
                    # the first (smaller) query the winner.
                    state.prune_with_descendants(loser, keep={winner.node})
                    removed = True
        if not removed:
            return


def prune_ucq(queries: List[ConjunctiveQuery]) -> List[ConjunctiveQuery]:
    """Pairwise subsumption minimization of a flat UCQ (no provenance)."""
    order = sorted(range(len(queries)), key=lambda i: _canon_key(queries[i]))
    alive = [True] * len(queries)
    for i in order:
        if not alive[i]:
            continue
        for j in order:
            if i == j or not alive[j]:
                continue
            if subsumes(queries[i], queries[j]):
                alive[j] = False
    return [q for q, keep in zip(queries, alive) if keep]


def is_subsumption_minimal(queries: List[ConjunctiveQuery]) -> bool:
    for i, q1 in enumerate(queries):
        for j, q2 in enumerate(queries):
            if i != j and subsumes(q1, q2):
                return False
    return True

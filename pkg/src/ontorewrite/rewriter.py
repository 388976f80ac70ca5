"""The backward-chaining rewriting loop: applicability, factorizability,
rewriting and factorization steps, dedup modulo canonical renaming, query
provenance, caches and metrics.

Queries are labeled r/f by the step that produced them (the input query is r)
and explored/unexplored; the final rewriting collects the explored r-labeled
queries whose bodies mention no auxiliary normalization predicate.
"""

from __future__ import annotations

import itertools
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from .cache import LRUCache
from .eliminate import EliminationContext, reduce_query
from .graphs import affected_positions
from .model import (Atom, ConjunctiveQuery, TGD, VAR, canonical_rename,
                    make_query, mgu, subst_atom)
from .normalize import is_linear


class BudgetExhaustedError(RuntimeError):
    pass


@dataclass
class RewriteOptions:
    elimination: Optional[bool] = None  # None: enabled iff the rule set is linear
    subsumption: str = "none"  # none | tail | idec | irew
    budget: Optional[int] = None
    record_produced: bool = False


@dataclass
class Metrics:
    explored: int = 0
    generated: int = 0
    factorized: int = 0
    rewrite_time: float = 0.0
    split_time: float = 0.0
    unfold_time: float = 0.0
    components: int = 1

    def merge(self, other: "Metrics"):
        self.explored += other.explored
        self.generated += other.generated
        self.factorized += other.factorized


class RewriterContext:
    """Shared state for one ontology: normalized rules, the head-predicate
    rule index, caches, and lazily built elimination/affected structures.
    Immutable once built; safe to share across rewriter workers."""

    def __init__(self, tgds: List[TGD], aux_preds: Iterable[str] = (),
                 arities: Optional[dict] = None,
                 mgu_cache_size: int = 4500, rename_cache_size: int = 55000,
                 elim_cache_size: int = 2000,
                 max_path_length: Optional[int] = None):
        self.tgds = list(tgds)
        self.aux_preds = frozenset(aux_preds)
        self.arities = dict(arities or {})
        self.linear = is_linear(self.tgds)
        self.tgd_index: Dict[str, List[int]] = {}
        for k, t in enumerate(self.tgds):
            self.tgd_index.setdefault(t.head.pred, []).append(k)
        self.mgu_cache = LRUCache(mgu_cache_size)
        self.rename_cache = LRUCache(rename_cache_size)
        self._elim_cache_size = elim_cache_size
        self._max_path_length = max_path_length
        self._elim: Optional[EliminationContext] = None
        self._affected = None
        self._lock = threading.Lock()

    def canonical(self, q: ConjunctiveQuery) -> ConjunctiveQuery:
        cached = self.rename_cache.get(q)
        if cached is None:
            cached = canonical_rename(q)
            self.rename_cache.put(q, cached)
        return cached

    def unify(self, atoms: Tuple[Atom, ...], preferred: FrozenSet) -> Optional[dict]:
        key = (frozenset(atoms), preferred)
        hit = self.mgu_cache.get(key, False)
        if hit is not False:
            return hit
        result = mgu(atoms, preferred)
        self.mgu_cache.put(key, result)
        return result

    def elimination(self) -> EliminationContext:
        with self._lock:
            if self._elim is None:
                self._elim = EliminationContext(
                    self.tgds, self.arities, self._max_path_length,
                    self._elim_cache_size)
            return self._elim

    def affected(self):
        with self._lock:
            if self._affected is None:
                self._affected = affected_positions(self.tgds)
            return self._affected

    def mentions_aux(self, q: ConjunctiveQuery) -> bool:
        return any(a.pred in self.aux_preds for a in q.body)


# ---------------------------------------------------------------------------
# Applicability and factorizability.


def applicable(tgd: TGD, S: Tuple[Atom, ...], q: ConjunctiveQuery) -> bool:
    """The rule can resolve against S: S plus the rule head unifies, and no
    atom of S carries a constant or a shared variable of q at the rule's
    existential position."""
    if not S:
        return False
    head = tgd.head
    if any(a.pred != head.pred or len(a.args) != len(head.args) for a in S):
        return False
    epos = tgd.existential_position()
    if epos is not None:
        shared = q.shared_variables()
        for a in S:
            t = a.args[epos - 1]
            if t.kind != VAR or t in shared:
                return False
    renamed = tgd.rename(0)  # step counter starts at 1, so ^0 never collides
    return mgu(tuple(S) + (renamed.head,)) is not None


def factorizable(S: Tuple[Atom, ...], tgd: TGD, q: ConjunctiveQuery) -> bool:
    """S unifies, the rule has an existential position, and some variable
    outside the rest of the body occurs in every atom of S exactly there."""
    if len(S) < 2:
        return False
    epos = tgd.existential_position()
    if epos is None:
        return False
    if any(a.pred != tgd.head.pred or len(a.args) != len(tgd.head.args) for a in S):
        return False
    v = S[0].args[epos - 1]
    if v.kind != VAR:
        return False
    for a in S:
        if a.args[epos - 1] != v:
            return False
        if any(t == v for i, t in enumerate(a.args, start=1) if i != epos):
            return False
    for a in q.body:
        if a not in S and v in a.args:
            return False
    return mgu(S) is not None


def rewrite_step(q: ConjunctiveQuery, S: Tuple[Atom, ...], tgd: TGD, step: int,
                 preferred: FrozenSet = frozenset(),
                 ctx: Optional[RewriterContext] = None) -> ConjunctiveQuery:
    """Replace S with the body of the rule renamed by the step counter and
    apply the most general unifier of S and the renamed head throughout."""
    renamed = tgd.rename(step)
    atoms = tuple(S) + (renamed.head,)
    gamma = ctx.unify(atoms, preferred) if ctx else mgu(atoms, preferred)
    if gamma is None:
        raise ValueError("rewrite_step requires an applicable rule")
    removed = set(S)
    new_body = [a for a in q.body if a not in removed]
    new_body.extend(renamed.body)
    return make_query(q.head_pred,
                      (gamma.get(t, t) for t in q.head_args),
                      (subst_atom(gamma, a) for a in new_body))


def factorize_step(q: ConjunctiveQuery, S: Tuple[Atom, ...],
                   preferred: FrozenSet = frozenset(),
                   ctx: Optional[RewriterContext] = None) -> ConjunctiveQuery:
    """Apply the most general unifier of S to the whole query."""
    atoms = tuple(S)
    gamma = ctx.unify(atoms, preferred) if ctx else mgu(atoms, preferred)
    if gamma is None:
        raise ValueError("factorize_step requires a unifiable atom set")
    return make_query(q.head_pred,
                      (gamma.get(t, t) for t in q.head_args),
                      (subst_atom(gamma, a) for a in q.body))


# ---------------------------------------------------------------------------
# The rewriting loop.


@dataclass
class QueryEntry:
    node: int
    query: ConjunctiveQuery
    label: str  # 'r' or 'f'
    explored: bool = False
    pruned: bool = False
    parents: Set[int] = field(default_factory=set)
    children: Set[int] = field(default_factory=set)


class RewriteState:
    """The labeled query set with its canonical-form index, FIFO of
    unexplored queries, provenance edges and counters."""

    def __init__(self, ctx: RewriterContext, options: RewriteOptions):
        self.ctx = ctx
        self.options = options
        self.entries: List[QueryEntry] = []
        self.canon_index: Dict[ConjunctiveQuery, int] = {}
        self.queue: deque = deque()
        self.metrics = Metrics()
        self.step = 0
        self.produced: List[ConjunctiveQuery] = []

    def _new_entry(self, q: ConjunctiveQuery, label: str, canon) -> QueryEntry:
        entry = QueryEntry(len(self.entries), q, label)
        self.entries.append(entry)
        self.canon_index[canon] = entry.node
        self.queue.append(entry.node)
        return entry

    def _add_edge(self, parent: Optional[QueryEntry], child: QueryEntry):
        if parent is not None and parent.node != child.node:
            parent.children.add(child.node)
            child.parents.add(parent.node)

    def admit(self, q: ConjunctiveQuery, label: str,
              parent: Optional[QueryEntry]) -> Optional[QueryEntry]:
        canon = self.ctx.canonical(q)
        node = self.canon_index.get(canon)
        if node is not None:
            entry = self.entries[node]
            if label == "r" and entry.label == "f":
                entry.label = "r"  # an r-producer reached an f-only query
                if self.options.subsumption == "irew":
                    self._irew_admit(entry)
            self._add_edge(parent, entry)
            return None
        entry = self._new_entry(q, label, canon)
        self._add_edge(parent, entry)
        if label == "r" and self.options.subsumption == "irew":
            self._irew_admit(entry)
        return entry

    # -- intra-rewriting subsumption ---------------------------------------

    def _alive_r(self):
        return [e for e in self.entries
                if e.label == "r" and not e.pruned]

    def _irew_admit(self, entry: QueryEntry):
        from .subsume import subsumes
        for other in self._alive_r():
            if other.node == entry.node:
                continue
            if subsumes(other.query, entry.query):
                entry.pruned = True
                return
        for other in self._alive_r():
            if other.node == entry.node:
                continue
            if subsumes(entry.query, other.query):
                self.prune_with_descendants(other, keep={entry.node})

    def prune_with_descendants(self, entry: QueryEntry, keep: Set[int]):
        """Prune an entry and cascade to descendants whose parents are all
        pruned; unexplored f-labeled queries are never pruned (they exist
        solely to enable future rewriting steps)."""
        entry.pruned = True
        frontier = deque(entry.children)
        while frontier:
            node = frontier.popleft()
            child = self.entries[node]
            if node in keep or child.pruned:
                continue
            if child.label == "f" and not child.explored:
                continue
            if all(self.entries[p].pruned for p in child.parents):
                child.pruned = True
                frontier.extend(child.children)

    # -- results -------------------------------------------------------------

    def final_entries(self) -> List[QueryEntry]:
        return [e for e in self.entries
                if e.label == "r" and e.explored and not e.pruned]

    def final_queries(self) -> List[ConjunctiveQuery]:
        return [e.query for e in self.final_entries()
                if not self.ctx.mentions_aux(e.query)]


@dataclass
class RewriteResult:
    queries: List[ConjunctiveQuery]
    metrics: Metrics
    state: RewriteState


def _enumerate_factorizable(q: ConjunctiveQuery, tgd: TGD):
    """Subsets of same-predicate body atoms, increasing size, stable order."""
    epos = tgd.existential_position()
    if epos is None:
        return
    group = [a for a in q.body
             if a.pred == tgd.head.pred and len(a.args) == len(tgd.head.args)]
    if len(group) < 2:
        return
    for size in range(2, len(group) + 1):
        yield from itertools.combinations(group, size)


def xrewrite(q: ConjunctiveQuery, ctx: RewriterContext,
             options: Optional[RewriteOptions] = None) -> RewriteResult:
    """Exhaustively apply rewriting and factorization steps until fixpoint.

    New queries are deduplicated modulo bijective variable renaming: a
    rewriting-step output against existing r-queries, a factorization output
    against all queries.  With elimination on (default for linear rule sets)
    every admitted query is first reduced through atom coverage.
    """
    options = options or RewriteOptions()
    eliminating = options.elimination
    if eliminating is None:
        eliminating = ctx.linear
    if eliminating and not ctx.linear:
        raise ValueError("query elimination requires a linear rule set")
    elim = ctx.elimination() if eliminating else None

    start = time.perf_counter()
    state = RewriteState(ctx, options)
    preferred = frozenset(q.variables())

    q0 = reduce_query(q, elim) if elim else q
    state.admit(q0, "r", None)

    while state.queue:
        node = state.queue.popleft()
        entry = state.entries[node]
        if entry.pruned:
            continue
        cur = entry.query
        body_preds = {a.pred for a in cur.body}
        for k, tgd in enumerate(ctx.tgds):
            if tgd.head.pred not in body_preds:
                continue
            # rewriting step (single-atom resolution; factorization below
            # prepares any multi-atom unification that matters)
            for a in cur.body:
                if a.pred != tgd.head.pred:
                    continue
                S = (a,)
                if applicable(tgd, S, cur):
                    state.step += 1
                    out = rewrite_step(cur, S, tgd, state.step, preferred, ctx)
                    state.metrics.generated += 1
                    if options.record_produced:
                        state.produced.append(out)
                    if elim:
                        out = reduce_query(out, elim)
                    if options.budget is not None and state.metrics.generated > options.budget:
                        raise BudgetExhaustedError(
                            f"rewriting exceeded the step budget of {options.budget}")
                    state.admit(out, "r", entry)
            # factorization step
            for S in _enumerate_factorizable(cur, tgd):
                if factorizable(S, tgd, cur):
                    out = factorize_step(cur, S, preferred, ctx)
                    state.metrics.factorized += 1
                    if options.record_produced:
                        state.produced.append(out)
                    if elim:
                        out = reduce_query(out, elim)
                    state.admit(out, "f", entry)
        if not entry.explored:
            entry.explored = True
            state.metrics.explored += 1

    if options.subsumption in ("tail", "idec"):
        from .subsume import prune_tail_state
        prune_tail_state(state)

    state.metrics.rewrite_time = time.perf_counter() - start
    return RewriteResult(state.final_queries(), state.metrics, state)

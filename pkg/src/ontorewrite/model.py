"""Core symbolic algebra: terms, atoms, conjunctive queries, rules,
substitutions, unification, homomorphism search and canonical renaming.

Everything here is immutable and safely shareable across threads; all
operations are pure functions.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Optional

# Term kinds.  Constants and nulls share a total order in which every null
# follows every constant; (kind, name) tuple comparison realises it.
CONST = 0
VAR = 1
NULL = 2

_KIND_NAMES = {CONST: "constant", VAR: "variable", NULL: "null"}


class Term(NamedTuple):
    kind: int
    name: str

    def is_const(self) -> bool:
        return self.kind == CONST

    def is_var(self) -> bool:
        return self.kind == VAR

    def is_null(self) -> bool:
        return self.kind == NULL

    def __repr__(self):
        return f"{_KIND_NAMES[self.kind][0]}:{self.name}"

    def __str__(self):
        return self.name


def const(name: str) -> Term:
    return Term(CONST, name)


def var(name: str) -> Term:
    return Term(VAR, name)


def null(name: str) -> Term:
    return Term(NULL, name)


class Atom(NamedTuple):
    pred: str
    args: tuple

    def terms(self) -> set:
        return set(self.args)

    def variables(self) -> set:
        return {t for t in self.args if t.kind == VAR}

    def __str__(self):
        if not self.args:
            return f"{self.pred}()"
        return f"{self.pred}({', '.join(str(t) for t in self.args)})"


def atom(pred: str, *args: Term) -> Atom:
    return Atom(pred, tuple(args))


class ConjunctiveQuery(NamedTuple):
    """A CQ seen as a rule head_pred(head_args) :- body.

    The body is duplicate-free and order-preserving (set semantics with a
    deterministic iteration order).  Head arguments are usually variables
    but may become constants through unification steps.
    """

    head_pred: str
    head_args: tuple
    body: tuple

    def variables(self) -> set:
        vs = {t for t in self.head_args if t.kind == VAR}
        for a in self.body:
            vs.update(t for t in a.args if t.kind == VAR)
        return vs

    def terms(self) -> set:
        ts = set(self.head_args)
        for a in self.body:
            ts.update(a.args)
        return ts

    def occurrences(self) -> dict:
        """Number of occurrences of each term across head and body."""
        occ: dict = {}
        for t in self.head_args:
            occ[t] = occ.get(t, 0) + 1
        for a in self.body:
            for t in a.args:
                occ[t] = occ.get(t, 0) + 1
        return occ

    def shared_variables(self) -> set:
        """Variables occurring more than once in the query (head included).

        Distinguished variables are always shared: they occur in the head
        and, by safety, in the body.
        """
        return {t for t, n in self.occurrences().items() if t.kind == VAR and n >= 2}

    def is_safe(self) -> bool:
        body_vars = set()
        for a in self.body:
            body_vars.update(a.variables())
        return all(t.kind != VAR or t in body_vars for t in self.head_args)

    def __str__(self):
        head = f"{self.head_pred}({', '.join(str(t) for t in self.head_args)})"
        if not self.body:
            return f"{head} :- ."
        return f"{head} :- {', '.join(str(a) for a in self.body)}."


def make_query(head_pred: str, head_args: Iterable[Term], body: Iterable[Atom]) -> ConjunctiveQuery:
    """Build a CQ, de-duplicating body atoms while preserving first positions."""
    seen = dict.fromkeys(body)
    return ConjunctiveQuery(head_pred, tuple(head_args), tuple(seen))


class TGD(NamedTuple):
    """A tuple-generating dependency in normal form: a conjunctive body and a
    single head atom carrying at most one existential variable, occurring once.
    """

    body: tuple
    head: Atom

    def body_variables(self) -> set:
        vs = set()
        for a in self.body:
            vs.update(t for t in a.args if t.kind == VAR)
        return vs

    def existential_var(self) -> Optional[Term]:
        body_vars = self.body_variables()
        for t in self.head.args:
            if t.kind == VAR and t not in body_vars:
                return t
        return None

    def existential_position(self) -> Optional[int]:
        """1-based argument index of the existential variable, or None."""
        body_vars = self.body_variables()
        for i, t in enumerate(self.head.args, start=1):
            if t.kind == VAR and t not in body_vars:
                return i
        return None

    def rename(self, step: int) -> "TGD":
        """The rule with every variable X replaced by X^step."""
        sub = {v: Term(VAR, f"{v.name}^{step}") for v in self.variables()}
        return TGD(tuple(subst_atom(sub, a) for a in self.body), subst_atom(sub, self.head))

    def variables(self) -> set:
        vs = self.body_variables()
        vs.update(t for t in self.head.args if t.kind == VAR)
        return vs

    def __str__(self):
        return f"{', '.join(str(a) for a in self.body)} -> {self.head}."


# ---------------------------------------------------------------------------
# Substitutions.
#
# A substitution is a plain dict mapping terms to terms.  Constants map to
# themselves implicitly; the empty dict is the identity.


def subst_term(sub: dict, t: Term) -> Term:
    return sub.get(t, t)


def subst_atom(sub: dict, a: Atom) -> Atom:
    return Atom(a.pred, tuple(sub.get(t, t) for t in a.args))


def subst_atoms(sub: dict, atoms: Iterable[Atom]) -> tuple:
    seen = dict.fromkeys(subst_atom(sub, a) for a in atoms)
    return tuple(seen)


def subst_query(sub: dict, q: ConjunctiveQuery) -> ConjunctiveQuery:
    return make_query(q.head_pred, (sub.get(t, t) for t in q.head_args), (subst_atom(sub, a) for a in q.body))


def apply(sub: dict, x):
    """Apply a substitution to an atom, a query, or a collection of atoms."""
    if isinstance(x, Atom):
        return subst_atom(sub, x)
    if isinstance(x, ConjunctiveQuery):
        return subst_query(sub, x)
    return subst_atoms(sub, x)


def compose(s1: dict, s2: dict) -> dict:
    """The substitution equivalent to applying s1 first, then s2."""
    out = {}
    for k, v in s1.items():
        w = s2.get(v, v)
        if w != k:
            out[k] = w
    for k, v in s2.items():
        if k not in s1 and v != k:
            out[k] = v
    return out


# ---------------------------------------------------------------------------
# Unification.
#
# There are no function symbols, so unification is positional matching with
# union-find over terms.  Representatives are chosen with rank preferring
# constants, then variables from `preferred`, then the smallest remaining
# variable; the result is idempotent and, whenever possible, maps preferred
# variables to preferred variables or constants.


def mgu(atoms: Iterable[Atom], preferred: frozenset = frozenset()) -> Optional[dict]:
    atoms = list(atoms)
    if len(atoms) < 2:
        return {}
    first = atoms[0]
    for a in atoms[1:]:
        if a.pred != first.pred or len(a.args) != len(first.args):
            return None

    parent: dict = {}

    def find(t):
        root = t
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(t, t) != t:
            parent[t], t = root, parent[t]
        return root

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra == rb:
            return True
        if ra.kind != VAR and rb.kind != VAR:
            return False  # two distinct constants/nulls clash
        if ra.kind != VAR:
            parent[rb] = ra
        else:
            parent[ra] = rb
        return True

    for a in atoms[1:]:
        for t1, t2 in zip(first.args, a.args):
            if not union(t1, t2):
                return None

    # Group classes and pick representatives.
    classes: dict = {}
    for a in atoms:
        for t in a.args:
            classes.setdefault(find(t), []).append(t)

    def rank(t):
        if t.kind != VAR:
            return (0, t)
        if t in preferred:
            return (1, t)
        return (2, t)

    out = {}
    for members in classes.values():
        rep = min(set(members), key=rank)
        for t in set(members):
            if t != rep:
                out[t] = rep
    return out


def unifies(atoms: Iterable[Atom]) -> bool:
    return mgu(atoms) is not None


# ---------------------------------------------------------------------------
# Homomorphisms.


def _extend(binding: dict, src: Term, dst: Term) -> Optional[dict]:
    if src.kind != VAR:
        return binding if src == dst else None
    bound = binding.get(src)
    if bound is None:
        out = dict(binding)
        out[src] = dst
        return out
    return binding if bound == dst else None


def _match_atom(binding: dict, a: Atom, b: Atom) -> Optional[dict]:
    if a.pred != b.pred or len(a.args) != len(b.args):
        return None
    for s, d in zip(a.args, b.args):
        binding = _extend(binding, s, d)
        if binding is None:
            return None
    return binding


def find_homomorphism(src: Iterable[Atom], dst: Iterable[Atom], fixed_head=None) -> Optional[dict]:
    """A substitution h with h(src) being a subset of dst, constants fixed.

    `fixed_head` is an optional pair of atoms (h1, h2) constraining
    h(h1) = h2.  Exhaustive backtracking over dst candidates, most
    constrained atom first.
    """
    src = list(src)
    dst = list(dst)
    binding: Optional[dict] = {}
    if fixed_head is not None:
        binding = _match_atom({}, fixed_head[0], fixed_head[1])
        if binding is None:
            return None

    by_pred: dict = {}
    for b in dst:
        by_pred.setdefault(b.pred, []).append(b)

    def search(remaining, binding):
        if not remaining:
            return binding
        # Pick the atom with fewest unbound variables, fewest candidates.
        def cost(a):
            unbound = sum(1 for t in a.args if t.kind == VAR and t not in binding)
            return (unbound, len(by_pred.get(a.pred, ())))

        a = min(remaining, key=cost)
        rest = [x for x in remaining if x is not a]
        for b in by_pred.get(a.pred, ()):
            nb = _match_atom(binding, a, b)
            if nb is not None:
                res = search(rest, nb)
                if res is not None:
                    return res
        return None

    return search(src, binding)


def atom_maps_onto(a: Atom, b: Atom) -> Optional[dict]:
    """A substitution h with h(a) = b (single-atom, positional)."""
    return _match_atom({}, a, b)


def atom_matches_injectively(a: Atom, b: Atom) -> Optional[dict]:
    """A substitution h with h(a) = b mapping distinct variables of a to
    distinct terms of b (a one-to-one matching)."""
    h = _match_atom({}, a, b)
    if h is None or len(set(h.values())) != len(h):
        return None
    return h


# ---------------------------------------------------------------------------
# Canonical renaming.
#
# Variables are mapped one-to-one onto the reserved ordered alphabet
# #1, #2, ... in first-use order, after choosing a deterministic body order.
# The order is found by branch-and-bound over atom sequences so that two
# queries equal modulo bijective variable renaming (and body permutation)
# yield identical canonical forms.  Head variables are named first, in head
# order, which keeps distinguished-argument order significant.


def _canonical_var(i: int) -> Term:
    return Term(VAR, f"#{i}")


def _atom_key(a: Atom, assignment: dict, next_idx: int):
    """Sort key an atom would have if placed next: constants, then assigned
    canonical indices, then hypothetical fresh indices in arg order."""
    key = [a.pred]
    fresh: dict = {}
    for t in a.args:
        if t.kind != VAR:
            key.append((0, t.name))
        elif t in assignment:
            key.append((1, assignment[t]))
        else:
            if t not in fresh:
                fresh[t] = next_idx + len(fresh)
            key.append((1, fresh[t]))
    return tuple(key)


def _canonical_order(body, assignment, next_idx):
    """Smallest canonical key sequence over all valid atom orders; returns
    the ordered original atoms.  Branches only on genuinely tied candidates,
    comparing the full key sequence each branch produces."""

    def rec(remaining, assign, idx):
        if not remaining:
            return [], []
        keyed = [(_atom_key(a, assign, idx), a) for a in remaining]
        best_key = min(k for k, _ in keyed)
        candidates = [a for k, a in keyed if k == best_key]
        best_seq = None
        best_form = None
        for a in candidates:
            sub_assign = dict(assign)
            sub_idx = idx
            for t in a.args:
                if t.kind == VAR and t not in sub_assign:
                    sub_assign[t] = sub_idx
                    sub_idx += 1
            rest = [x for x in remaining if x is not a]
            tail, tail_form = rec(rest, sub_assign, sub_idx)
            if best_form is None or tail_form < best_form:
                best_form = tail_form
                best_seq = [a] + tail
            if len(candidates) == 1:
                break
        return best_seq, [best_key] + best_form

    order, _ = rec(list(body), assignment, next_idx)
    return order


def canonical_rename(q: ConjunctiveQuery) -> ConjunctiveQuery:
    """The canonical form of q: constants map to themselves, variables onto
    #1, #2, ... so that renamings and body permutations coincide."""
    assignment: dict = {}
    idx = 1
    for t in q.head_args:
        if t.kind == VAR and t not in assignment:
            assignment[t] = idx
            idx += 1
    order = _canonical_order(list(q.body), assignment, idx)
    for a in order:
        for t in a.args:
            if t.kind == VAR and t not in assignment:
                assignment[t] = idx
                idx += 1
    sub = {t: _canonical_var(i) for t, i in assignment.items()}
    head = tuple(sub.get(t, t) for t in q.head_args)
    body = tuple(subst_atom(sub, a) for a in (order or []))
    return ConjunctiveQuery(q.head_pred, head, body)


def ordered_body(q: ConjunctiveQuery) -> list:
    """Body atoms of q in canonical-rename order (original atoms)."""
    assignment: dict = {}
    idx = 1
    for t in q.head_args:
        if t.kind == VAR and t not in assignment:
            assignment[t] = idx
            idx += 1
    return _canonical_order(list(q.body), assignment, idx) or []


def same_modulo_renaming(q1: ConjunctiveQuery, q2: ConjunctiveQuery) -> bool:
    return canonical_rename(q1) == canonical_rename(q2)

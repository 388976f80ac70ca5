"""Normal-form transformation for rules and syntactic classification.

A rule set is in normal form when every rule has a single head atom with at
most one existential variable, occurring once.  Rules outside normal form
are split into a chain through fresh auxiliary predicates that carry the
frontier variables plus the existentials introduced so far; the chain's last
predicate fans out to the original head atoms.  The transformation preserves
linearity and stickiness and grows the rule set at most quadratically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Set, Tuple

from .model import Atom, TGD, VAR
from .parser import RawTGD


def _is_normal(rule: RawTGD) -> bool:
    if len(rule.head) != 1:
        return False
    ev = rule.existential_vars()
    if len(ev) > 1:
        return False
    if ev:
        occurrences = sum(1 for t in rule.head[0].args if t == ev[0])
        return occurrences == 1
    return True


def _aux_base(used_preds: Set[str]) -> str:
    base = "aux"
    while any(p == base or p.startswith(base + "_") for p in used_preds):
        base += "x"
    return base


def normalize_tgds(rules: Iterable[RawTGD], used_preds: Optional[Set[str]] = None
                   ) -> Tuple[List[TGD], List[int], Set[str]]:
    """Split raw rules into normal form.

    Returns (normalized rules, provenance, auxiliary predicates) where
    provenance[i] is the index of the raw rule the i-th output came from.
    Auxiliary predicates are named deterministically `aux_<rule>_<step>`
    (base escalated if a user predicate collides with the reserved prefix).
    """
    rules = list(rules)
    if used_preds is None:
        used_preds = set()
        for r in rules:
            for a in r.body + r.head:
                used_preds.add(a.pred)
    base = _aux_base(used_preds)

    out: List[TGD] = []
    provenance: List[int] = []
    aux_preds: Set[str] = set()
    for idx, rule in enumerate(rules):
        if _is_normal(rule):
            out.append(TGD(rule.body, rule.head[0]))
            provenance.append(idx)
            continue
        existentials = rule.existential_vars()
        if not existentials:
            # No existentials: a multi-atom head splits into one rule per atom.
            for head_atom in rule.head:
                out.append(TGD(rule.body, head_atom))
                provenance.append(idx)
            continue
        body_vars = []
        for a in rule.body:
            for t in a.args:
                if t.kind == VAR and t not in body_vars:
                    body_vars.append(t)
        head_vars = set()
        for a in rule.head:
            head_vars.update(a.variables())
        frontier = [v for v in body_vars if v in head_vars]
        carried = list(frontier)
        prev_body = rule.body
        for step, z in enumerate(existentials, start=1):
            aux = f"{base}_{idx}_{step}"
            aux_preds.add(aux)
            head_atom = Atom(aux, tuple(carried + [z]))
            out.append(TGD(prev_body, head_atom))
            provenance.append(idx)
            carried.append(z)
            prev_body = (head_atom,)
        for head_atom in rule.head:
            out.append(TGD(prev_body, head_atom))
            provenance.append(idx)
    return out, provenance, aux_preds


# ---------------------------------------------------------------------------
# Classification.


def _as_raw(rule) -> RawTGD:
    if isinstance(rule, TGD):
        return RawTGD(rule.body, (rule.head,))
    return rule


def is_linear(rules: Iterable) -> bool:
    """Every rule has exactly one body atom."""
    return all(len(_as_raw(r).body) == 1 for r in rules)


def is_multi_linear(rules: Iterable) -> bool:
    """Every body atom of every rule contains all of the rule's body variables."""
    for r in rules:
        raw = _as_raw(r)
        body_vars = set()
        for a in raw.body:
            body_vars.update(a.variables())
        for a in raw.body:
            if a.variables() != body_vars:
                return False
    return True


@dataclass
class MarkedTGDSet:
    """The result of the variable-marking procedure: for each rule, the set
    of marked body-variable occurrences as (atom index, argument index) pairs
    (0-based), closed under the propagation step."""

    rules: list
    marks: list = field(default_factory=list)

    def marked_vars(self, rule_index: int) -> set:
        raw = _as_raw(self.rules[rule_index])
        return {raw.body[ai].args[pi] for ai, pi in self.marks[rule_index]}

    def body_occurrence_counts(self, rule_index: int) -> dict:
        raw = _as_raw(self.rules[rule_index])
        counts: dict = {}
        for a in raw.body:
            for t in a.args:
                if t.kind == VAR:
                    counts[t] = counts.get(t, 0) + 1
        return counts


def smark(rules: Iterable) -> MarkedTGDSet:
    """Initial marking (body variable absent from some head atom) followed by
    the propagation step, run to fixpoint."""
    raws = [_as_raw(r) for r in rules]
    marked: List[Set[Tuple[int, int]]] = []

    # Initial marking.
    for raw in raws:
        marks: Set[Tuple[int, int]] = set()
        body_vars = set()
        for a in raw.body:
            body_vars.update(a.variables())
        for v in body_vars:
            if any(v not in a.variables() for a in raw.head):
                for ai, a in enumerate(raw.body):
                    for pi, t in enumerate(a.args):
                        if t == v:
                            marks.add((ai, pi))
        marked.append(marks)

    # Propagation to fixpoint: for a rule sigma and a universally quantified
    # variable V of a head atom a, if some body atom b (of any rule) with the
    # predicate of a carries a marked variable at each position where V occurs
    # in a, then every body occurrence of V in sigma is marked.
    changed = True
    while changed:
        changed = False
        for ri, raw in enumerate(raws):
            body_vars = set()
            for a in raw.body:
                body_vars.update(a.variables())
            for head_atom in raw.head:
                for v in head_atom.variables():
                    if v not in body_vars:
                        continue
                    positions = [pi for pi, t in enumerate(head_atom.args) if t == v]
                    witness = any(
                        b.pred == head_atom.pred
                        and all(b.args[pi].kind == VAR and (ai, pi) in marked[rj]
                                for pi in positions)
                        for rj, other in enumerate(raws)
                        for ai, b in enumerate(other.body))
                    if witness:
                        for ai, a in enumerate(raw.body):
                            for pi, t in enumerate(a.args):
                                if t == v and (ai, pi) not in marked[ri]:
                                    marked[ri].add((ai, pi))
                                    changed = True
    return MarkedTGDSet(list(rules), marked)


def is_sticky(rules: Iterable) -> bool:
    """No rule body contains a marked variable occurring two or more times."""
    ms = smark(rules)
    for ri in range(len(ms.rules)):
        counts = ms.body_occurrence_counts(ri)
        for v in ms.marked_vars(ri):
            if counts.get(v, 0) >= 2:
                return False
    return True


def classify(rules: Iterable) -> dict:
    rules = list(rules)
    return {
        "linear": is_linear(rules),
        "multi_linear": is_multi_linear(rules),
        "sticky": is_sticky(rules),
    }

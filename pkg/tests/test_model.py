import itertools
import random

from ontorewrite.model import (Atom, ConjunctiveQuery, VAR, apply, atom,
                               canonical_rename, compose, const,
                               find_homomorphism, make_query, mgu,
                               same_modulo_renaming, subst_atom, var)

A, B, C, X, Y, Z = (var(n) for n in "ABCXYZ")
a, b, db = const("a"), const("b"), const("db")


def test_apply_rewriting_step_substitution():
    sub = {X: B, Y: db, Z: A}
    got = apply(sub, atom("hasCollaborator", Z, Y, X))
    assert got == atom("hasCollaborator", A, db, B)


def test_apply_empty_substitution_is_identity():
    q = make_query("p", [A], [atom("r", A, B)])
    assert apply({}, q) == q
    assert apply({}, atom("r", A, B)) == atom("r", A, B)


def test_apply_constant_instantiation():
    assert apply({A: a}, atom("p", A, A)) == atom("p", a, a)


def test_apply_respects_composition():
    rng = random.Random(7)
    terms = [A, B, C, X, Y, a, b]
    for _ in range(100):
        s1 = {v: rng.choice(terms) for v in rng.sample([A, B, C, X, Y], 3)}
        s2 = {v: rng.choice(terms) for v in rng.sample([A, B, C, X, Y], 3)}
        at = Atom("r", tuple(rng.choice(terms) for _ in range(3)))
        assert apply(s2, apply(s1, at)) == apply(compose(s1, s2), at)


def test_mgu_rewriting_step_example():
    got = mgu([atom("hasCollaborator", A, db, B),
               atom("hasCollaborator", Z, Y, X)], preferred=frozenset([A, B]))
    assert got == {Z: A, Y: db, X: B}


def test_mgu_prefers_constants():
    got = mgu([atom("t", a, A, C), atom("t", B, a, C)])
    assert got == {A: a, B: a}


def test_mgu_constant_clash():
    assert mgu([atom("p", a, X), atom("p", b, Y)]) is None


def test_mgu_idempotent():
    atoms = [atom("r", A, B, C), atom("r", X, X, Y)]
    sub = mgu(atoms)
    assert sub is not None
    once = [subst_atom(sub, at) for at in atoms]
    twice = [subst_atom(sub, at) for at in once]
    assert once == twice
    assert len({tuple(x.args) for x in once}) == 1


def _brute_force_unifiers(atoms, universe):
    """Every substitution over the atoms' variables into `universe` that
    unifies them (small-universe oracle)."""
    vs = sorted({t for at in atoms for t in at.args if t.kind == VAR},
                key=lambda t: t.name)
    for combo in itertools.product(universe, repeat=len(vs)):
        sub = dict(zip(vs, combo))
        images = {subst_atom(sub, at) for at in atoms}
        if len(images) == 1:
            yield sub


def test_mgu_generality_against_enumerated_unifiers():
    rng = random.Random(13)
    terms = [A, B, C, X, a]
    for _ in range(60):
        atoms = [Atom("r", tuple(rng.choice(terms) for _ in range(2)))
                 for _ in range(2)]
        general = mgu(atoms)
        universe = [a, b, A, B, C, X]
        brute = list(_brute_force_unifiers(atoms, universe))
        if general is None:
            assert brute == []
            continue
        # every unifier factors through the mgu: u = theta . mgu
        for u in brute:
            image = [subst_atom(compose(general, u), at) for at in atoms]
            direct = [subst_atom(u, at) for at in atoms]
            assert image == direct


def test_find_homomorphism_subset_embedding():
    got = find_homomorphism([atom("p_1", A)], [atom("p_1", A), atom("p_2", B)])
    assert got == {A: A}


def test_find_homomorphism_collapses_chain():
    got = find_homomorphism([atom("r", A, B), atom("r", B, C)], [atom("r", a, a)])
    assert got == {A: a, B: a, C: a}


def test_find_homomorphism_reflexivity_unsatisfiable():
    assert find_homomorphism([atom("r", A, A)], [atom("r", a, b)]) is None


def _brute_force_hom(src, dst, fixed_head=None):
    vs = sorted({t for at in src for t in at.args if t.kind == VAR},
                key=lambda t: t.name)
    if fixed_head:
        vs = sorted(set(vs) | {t for t in fixed_head[0].args if t.kind == VAR},
                    key=lambda t: t.name)
    universe = sorted({t for at in dst for t in at.args}
                      | ({t for t in fixed_head[1].args} if fixed_head else set()))
    targets = set(dst)
    for combo in itertools.product(universe, repeat=len(vs)):
        sub = dict(zip(vs, combo))
        if fixed_head and subst_atom(sub, fixed_head[0]) != fixed_head[1]:
            continue
        if all(subst_atom(sub, at) in targets for at in src):
            return True
    return not src and not fixed_head


def test_find_homomorphism_matches_brute_force():
    rng = random.Random(29)
    for _ in range(150):
        n_src = rng.randint(1, 3)
        src = [Atom(rng.choice(["r", "s"]),
                    tuple(rng.choice([A, B, C, X, Y]) for _ in range(2)))
               for _ in range(n_src)]
        dst = [Atom(rng.choice(["r", "s"]),
                    tuple(rng.choice([a, b, const("c")]) for _ in range(2)))
               for _ in range(rng.randint(1, 6))]
        got = find_homomorphism(src, dst)
        expect = _brute_force_hom(src, dst)
        assert (got is not None) == expect
        if got is not None:
            targets = set(dst)
            assert all(subst_atom(got, at) in targets for at in src)


def test_canonical_rename_invariance_under_renaming():
    q1 = make_query("p", [B], [atom("project", B), atom("inArea", B, db)])
    q2 = make_query("p", [X], [atom("project", X), atom("inArea", X, db)])
    assert canonical_rename(q1) == canonical_rename(q2)


def test_canonical_rename_distinguished_order_sensitivity():
    q1 = make_query("p", [A, B], [atom("r", A, B)])
    q2 = make_query("p", [B, A], [atom("r", A, B)])
    assert canonical_rename(q1) != canonical_rename(q2)


def test_canonical_rename_stable_under_body_permutation():
    q1 = make_query("p", [], [atom("r", A, B), atom("r", B, A)])
    q2 = make_query("p", [], [atom("r", B, A), atom("r", A, B)])
    assert canonical_rename(q1) == canonical_rename(q2)


def test_canonical_rename_random_invariance():
    rng = random.Random(41)
    names = ["A", "B", "C", "D", "E"]
    for _ in range(200):
        body = [Atom(rng.choice(["r", "s"]),
                     tuple(var(rng.choice(names)) for _ in range(2)))
                for _ in range(rng.randint(1, 4))]
        head_vars = sorted({t for at in body for t in at.args},
                           key=lambda t: t.name)
        head = tuple(rng.sample(head_vars, rng.randint(0, min(2, len(head_vars)))))
        q = make_query("p", head, body)
        # bijective renaming + body permutation
        perm = rng.sample(names, len(names))
        sub = {var(x): var("R" + y) for x, y in zip(names, perm)}
        shuffled = list(q.body)
        rng.shuffle(shuffled)
        q2 = make_query("p", [sub.get(t, t) for t in q.head_args],
                        [subst_atom(sub, at) for at in shuffled])
        assert canonical_rename(q) == canonical_rename(q2)
        assert same_modulo_renaming(q, q2)


def test_query_sharing_and_safety():
    q = make_query("p", [B], [atom("hasCollaborator", A, db, B)])
    assert q.shared_variables() == {B}
    assert q.is_safe()
    unsafe = ConjunctiveQuery("p", (C,), (atom("r", A, B),))
    assert not unsafe.is_safe()

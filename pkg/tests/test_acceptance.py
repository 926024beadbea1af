"""Acceptance suite: ten criteria, exact equality throughout.

Run with pytest, or directly with ``python3 tests/test_acceptance.py``;
either way one PASS/FAIL line is printed per criterion.
"""

import json
import os
import random
import subprocess
import sys
import time

import pytest

from hsforge import documents as docs
from hsforge.algebra import GF, QQ, PolyRing
from hsforge.generate import canonical_hs, generate_subst, integrate, top_action_law, verify_uniqueness
from hsforge.hsderiv import (
    HSDeriv,
    OperatorHandle,
    act,
    commutator,
    component,
    compose,
    ell,
    invert,
    is_iterative,
    op_order_at_most,
    operator_difference,
    phi_upper_D,
    tilde_apply,
    truncate_hs,
)
from hsforge.multiindex import CoIdeal, VarSet, split_pairs
from hsforge.oracle import (
    composition_law_C,
    direct_C,
    hs_inverse_partition,
    phiD_recursive_C,
    random_hs,
    random_hs_of_order,
    random_series,
    random_subst,
    random_unit,
)
from hsforge.series import Series, invert_partition, invert_recursive
from hsforge.substitution import (
    SubstMap,
    apply,
    apply_table,
    check_multiplicativity_table,
    coeff,
    compose as subst_compose,
    perturb_table,
    perturbable_entries,
    subst_from_table,
    table_from_subst,
    zero_map,
)

FIELDS = (QQ, GF(5))


def tm(prefix, n, m):
    names = (prefix,) if n == 1 else tuple(f"{prefix}{i}" for i in range(1, n + 1))
    return CoIdeal.tm(VarSet(names), m)


def ring_for(rng, max_gens=2):
    return PolyRing(rng.choice(FIELDS), ("x", "y")[: rng.randint(1, max_gens)])


def identity(ring, trunc):
    return HSDeriv.identity(ring, trunc)


# -- criteria ---------------------------------------------------------------------


def criterion_1():
    rng = random.Random(101)
    for i in range(200):
        ring = PolyRing(FIELDS[i % 2], ("x", "y")[: rng.randint(1, 2)])
        t = tm("s", rng.randint(1, 2), rng.randint(0, 4))
        r = random_unit(rng, ring, t)
        inv = invert_recursive(r)
        one = Series.one(ring, t.vars, t)
        assert invert_partition(r) == inv, f"partition inverse differs for {r}"
        assert r * inv == one and inv * r == one, f"r r* != 1 for {r}"
    return "200 units"


def criterion_2():
    rng = random.Random(102)
    for _ in range(500):
        ring = ring_for(rng)
        m = rng.randint(1, 4)
        src = tm("s", rng.randint(1, 2), m)
        dst = tm("t", rng.randint(1, 2), m)
        phi = random_subst(rng, ring, src, dst)
        e = rng.choice(dst.sorted())
        alpha = rng.choice([a for a in src.sorted() if sum(a) <= sum(e)])
        assert coeff(phi, alpha, e) == direct_C(phi, alpha, e), f"C_{e}({alpha}) differs"
    return "500 triples"


def criterion_3():
    rng = random.Random(103)
    for _ in range(200):
        ring = ring_for(rng)
        m = rng.randint(1, 3)
        a, b, c = (tm(p, rng.randint(1, 2), m) for p in "stu")
        phi, psi = random_subst(rng, ring, a, b), random_subst(rng, ring, b, c)
        comp = subst_compose(psi, phi)
        for f in c.sorted():
            for alpha in a.sorted():
                if sum(alpha) <= sum(f):
                    assert composition_law_C(psi, phi, alpha, f) == coeff(comp, alpha, f)
        assert subst_compose(psi, zero_map(ring, a, b)) == zero_map(ring, a, c)
        assert subst_compose(zero_map(ring, b, c), phi) == zero_map(ring, a, c)
    return "200 pairs"


def criterion_4():
    rng = random.Random(104)
    controls = 0
    for _ in range(100):
        ring = ring_for(rng)
        m = rng.randint(1, 3)
        src, dst = tm("s", rng.randint(1, 2), m), tm("t", rng.randint(1, 2), m)
        phi = random_subst(rng, ring, src, dst)
        K = table_from_subst(phi)
        assert check_multiplicativity_table(K), "forward direction failed"
        back = subst_from_table(K)
        assert back == phi
        for _ in range(20):
            r = random_series(rng, ring, src)
            assert apply_table(K, r) == apply(back, r) == apply(phi, r)
        keys = perturbable_entries(K)
        assert keys, "no entry to perturb"
        assert not check_multiplicativity_table(perturb_table(K, rng.choice(keys))), "negative control passed"
        controls += 1
    return f"100 maps, {controls} negative controls"


def criterion_5():
    rng = random.Random(105)
    for _ in range(100):
        ring = ring_for(rng)
        t = tm("s", rng.randint(1, 2), rng.randint(1, 3))
        D, E, F = (random_hs(rng, ring, t) for _ in range(3))
        Ds = invert(D)
        I = identity(ring, t)
        assert compose(D, Ds) == I == compose(Ds, D)
        assert compose(compose(D, E), F) == compose(D, compose(E, F))
        a = rng.choice(ring.monomials_up_to(2)) + ring.const(rng.randint(-2, 2))
        b = rng.choice(ring.monomials_up_to(2)) * ring.gen("x")
        witnesses = ring.monomials_up_to(2)
        for alpha in t.sorted():
            pairs = split_pairs(alpha)
            leib = sum((component(D, p, a) * component(D, q, b) for p, q in pairs), ring.zero())
            assert component(D, alpha, a * b) == leib
            for w in witnesses:
                dual = sum((component(D, p, component(Ds, q, a) * w) for p, q in pairs), ring.zero())
                assert a * component(D, alpha, w) == dual
                assert hs_inverse_partition(D, alpha, w) == component(Ds, alpha, w)
            n = sum(alpha)
            if n:
                diff = operator_difference(OperatorHandle(Ds, alpha), OperatorHandle(D, alpha), (-1) ** n)
                assert op_order_at_most(diff, n - 1, ring.monomials_up_to(t.max_norm + 2))
    return "100 random triples"


def criterion_6():
    rng = random.Random(106)
    strict = 0
    for i in range(100):
        ring = ring_for(rng)
        t = tm("s", rng.randint(1, 2), rng.randint(1, 4))
        l1 = rng.randint(1, t.max_norm)
        l2 = rng.randint(1, t.max_norm) if i % 2 else min(t.max_norm, l1 + 1)
        D = random_hs_of_order(rng, ring, t, l1)
        E = random_hs_of_order(rng, ring, t, l2)
        assert ell(compose(D, E)) >= min(ell(D), ell(E))
        if ell(E) > ell(D):
            assert ell(compose(D, E)) == ell(D)
            strict += 1
        assert ell(commutator(D, E)) >= ell(D) + ell(E)
    for _ in range(50):
        ring = ring_for(rng)
        t = tm("s", rng.randint(1, 2), 3)
        A, B, C, D = (random_hs(rng, ring, t) for _ in range(4))
        assert commutator(commutator(commutator(A, B), C), D) == identity(ring, t)
    return f"100 pairs ({strict} strict cases), 50 nilpotency words"


def criterion_7():
    rng = random.Random(107)
    for _ in range(100):
        ring = ring_for(rng)
        m = rng.randint(1, 3)
        s, t, u = tm("s", rng.randint(1, 2), m), tm("t", rng.randint(1, 2), m), tm("u", 1, m)
        phi, psi = random_subst(rng, ring, s, t), random_subst(rng, ring, t, u)
        D, E = random_hs(rng, ring, s), random_hs(rng, ring, s)
        pD = phi_upper_D(phi, D)
        r = random_series(rng, ring, s)
        assert tilde_apply(act(phi, D), apply(pD, r)) == apply(phi, tilde_apply(D, r))
        assert invert(act(phi, D)) == act(pD, invert(D))
        assert act(phi, compose(D, E)) == compose(act(phi, D), act(pD, E))
        assert phi_upper_D(subst_compose(psi, phi), D) == subst_compose(phi_upper_D(psi, act(phi, D)), pD)
        scalars = [ring.const(c) for c in (0, 1, -1, 2)]
        const = SubstMap(
            ring,
            s,
            t,
            [Series(ring, t.vars, t, {a: rng.choice(scalars) for a in t.sorted() if any(a)}, check=False) for _ in s.vars],
            check=False,
        )
        assert phi_upper_D(const, D) == const
        memo = {}
        for e in t.sorted():
            for nu in s.sorted():
                if sum(nu) <= sum(e):
                    assert phiD_recursive_C(phi, D, nu, e, memo) == coeff(pD, nu, e)
    return "100 instances"


def criterion_8():
    rng = random.Random(108)
    rings = (PolyRing(QQ, ("x", "y")), PolyRing(GF(5), ("x",)))
    for i in range(100):
        ring = rings[i % 2]
        m = rng.randint(1, 3)
        D = canonical_hs(ring, m)
        G = random_hs(rng, ring, tm("t", rng.randint(1, 2), m))
        phi = generate_subst(D, G)
        assert act(phi, D) == G, "round trip failed"
        if i % 4 == 0:
            assert top_action_law(phi, D)
            assert verify_uniqueness(D, phi)
            assert verify_uniqueness(D, random_subst(rng, ring, D.trunc, G.trunc))
        n = rng.randint(1, 2)
        E = random_hs(rng, ring, tm("s", rng.randint(1, 2), n))
        assert truncate_hs(integrate(E, rng.randint(n, 3)), n) == E
    return "100 generated maps"


def criterion_9():
    for n in (1, 2):
        for m in range(5):
            assert is_iterative(canonical_hs(PolyRing(QQ, ("x", "y")[:n]), m))
    ring = PolyRing(QQ, ("x",))
    D = HSDeriv.parse(ring, tm("s", 1, 2), {"x": "x + s + s^2"})
    assert not is_iterative(D)
    return "canonical n<=2, m<=4; non-iterative example rejected"


def _cli(args, stdin=b"", env=None):
    full = dict(os.environ)
    full.pop("HSFORGE_SEED", None)
    full.update(env or {})
    return subprocess.run([sys.executable, "-m", "hsforge", *args], input=stdin, capture_output=True, env=full)


def criterion_10():
    rng = random.Random(110)
    ring = PolyRing(QQ, ("x", "y"))
    s, t = tm("s", 2, 3), tm("t", 1, 3)
    objs = [random_series(rng, ring, s), random_subst(rng, ring, s, t), random_hs(rng, ring, s), ring.parse("x^2/3 - y")]
    for obj in objs:
        text = docs.dumps(docs.encode(obj))
        assert docs.decode(docs.loads(text)) == obj
        assert docs.dumps(docs.encode(docs.decode(docs.loads(text)))) == text
    doc = docs.dumps(docs.encode(objs[2])).encode()
    a, b = _cli(["hs", "invert"], doc), _cli(["hs", "invert"], doc)
    assert a.returncode == 0 and a.stdout == b.stdout, "non-deterministic output"
    ok = _cli(["selfcheck", "--seed", "0"])
    assert ok.returncode == 0, ok.stdout[:500]
    assert json.loads(ok.stdout)["passed"]
    bad = _cli(["selfcheck", "--seed", "0", "--perturb"])
    assert bad.returncode == 3
    return "determinism, round trip, selfcheck exit codes 0/3"


CRITERIA = [
    (1, "unit-group formula", criterion_1),
    (2, "coefficient formula", criterion_2),
    (3, "composition law", criterion_3),
    (4, "multiplicativity criterion", criterion_4),
    (5, "HS group", criterion_5),
    (6, "ell calculus", criterion_6),
    (7, "phi^D suite", criterion_7),
    (8, "generation suite", criterion_8),
    (9, "iterativity", criterion_9),
    (10, "command line", criterion_10),
]


def _evaluate(number, title, fn):
    start = time.perf_counter()
    try:
        detail = fn()
    except AssertionError as exc:
        return False, f"FAIL criterion {number:2d} ({title}): {exc or 'assertion failed'}"
    return True, f"PASS criterion {number:2d} ({title}): {detail} in {time.perf_counter() - start:.1f}s"


@pytest.mark.parametrize("number,title,fn", CRITERIA, ids=[f"criterion_{n:02d}" for n, _, _ in CRITERIA])
def test_criterion(number, title, fn, capsys):
    ok, line = _evaluate(number, title, fn)
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, line


if __name__ == "__main__":
    results = [_evaluate(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)

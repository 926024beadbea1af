import random

import pytest

from conftest import hsd, ser, subst, tm
from hsforge.algebra import GF, QQ, Derivation, PolyRing
from hsforge.errors import PreconditionError, UnsupportedGeneratingSet
from hsforge.generate import (
    GenerationProblem,
    canonical_hs,
    first_order_basis,
    generate_stages,
    generate_subst,
    integrate,
    integrate_stream,
    split_top,
    stage_truncations_agree,
    top_action_law,
    verify_uniqueness,
)
from hsforge.hsderiv import HSDeriv, act, component, is_iterative, truncate_hs
from hsforge.multiindex import CoIdeal, VarSet
from hsforge.oracle import random_hs, random_subst
from hsforge.substitution import SubstMap, add, identity_map, zero_map


def test_split_top(Qx):
    s, t = tm("s", 2), tm("t", 2)
    phi = subst(Qx, {"s": "t + t^2"}, s, t)
    top, low = split_top(phi)
    assert top == subst(Qx, {"s": "t^2"}, s, t) and low == subst(Qx, {"s": "t"}, s, t)
    only_top = subst(Qx, {"s": "x*t^2"}, s, t)
    assert split_top(only_top) == (only_top, zero_map(Qx, s, t))
    assert add(*split_top(phi)) == phi
    with pytest.raises(PreconditionError):
        split_top(subst(Qx, {"s": "t^2"}, s, tm("t", 3)))


def test_top_action_law(Qxy):
    rng = random.Random(1)
    for m in (1, 2, 3):
        D = canonical_hs(Qxy, m)
        t = tm("t1,t2", m)
        for _ in range(5):
            phi = random_subst(rng, Qxy, D.trunc, t)
            assert top_action_law(phi, D)
        assert top_action_law(zero_map(Qxy, D.trunc, t), D)


def test_top_component_single_variable(Qx):
    D = canonical_hs(Qx, 2, VarSet(("s",)))
    c = Qx.parse("x + 1")
    phi = SubstMap(Qx, D.trunc, tm("t", 2), [ser(Qx, tm("t", 2), "(x+1)*t^2")])
    E = act(phi, D)
    for w in Qx.monomials_up_to(4):
        assert component(E, (2,), w) == c * component(D, (1,), w)
        assert component(E, (1,), w).is_zero()


def test_generate_examples(Qx):
    D = canonical_hs(Qx, 2, VarSet(("s",)))
    assert generate_subst(D, D) == identity_map(Qx, D.trunc)
    t = tm("t", 2)
    G = hsd(Qx, t, {"x": "x + x^2*t + (x-3)*t^2"})
    phi = generate_subst(D, G)
    assert phi == subst(Qx, {"s": "x^2*t + (x-3)*t^2"}, D.trunc, t)
    assert act(phi, D) == G
    assert generate_subst(D, HSDeriv.identity(Qx, t)) == zero_map(Qx, D.trunc, t)


@pytest.mark.parametrize("ring", [PolyRing(QQ, ("x", "y")), PolyRing(GF(5), ("x",))])
def test_generate_round_trip(ring):
    rng = random.Random(2)
    for _ in range(10):
        m = rng.randint(1, 3)
        D = canonical_hs(ring, m)
        G = random_hs(rng, ring, tm(("t1", "t2")[: rng.randint(1, 2)], m))
        phi = generate_subst(D, G)
        assert act(phi, D) == G
        assert stage_truncations_agree(GenerationProblem(D, G))


def test_every_stage_obeys_the_top_law(Qxy):
    rng = random.Random(3)
    D = canonical_hs(Qxy, 3)
    G = random_hs(rng, Qxy, tm("t", 3))
    for r, phi in enumerate(generate_stages(GenerationProblem(D, G)), start=1):
        assert top_action_law(phi, truncate_hs(D, r))


def test_non_coordinate_basis(Qxy):
    # D with Phi_D(x) = x + s1, Phi_D(y) = y + x*s1 + s2 still has a unit-determinant basis
    D = hsd(Qxy, tm("s1,s2", 2), {"x": "x + s1", "y": "y + x*s1 + s2"})
    rng = random.Random(4)
    for _ in range(5):
        G = random_hs(rng, Qxy, tm("t", 2))
        assert act(generate_subst(D, G), D) == G


def test_uniqueness(Qxy):
    rng = random.Random(5)
    D = canonical_hs(Qxy, 3)
    for _ in range(10):
        phi = random_subst(rng, Qxy, D.trunc, tm("t1,t2", 3))
        assert verify_uniqueness(D, phi)
        assert verify_uniqueness(D, phi, phi)


def test_non_basis_collision(Qx):
    # two first-order components equal to d/dx: not a basis
    D = hsd(Qx, tm("s1,s2", 1), {"x": "x + s1 + s2"})
    t = tm("t", 1)
    phi = SubstMap(Qx, D.trunc, t, [ser(Qx, t, "t"), ser(Qx, t, "0")])
    psi = SubstMap(Qx, D.trunc, t, [ser(Qx, t, "0"), ser(Qx, t, "t")])
    assert phi != psi and act(phi, D) == act(psi, D)
    with pytest.raises(UnsupportedGeneratingSet):
        generate_subst(D, act(phi, D))


def test_custom_solver(Qx):
    D = hsd(Qx, tm("s1,s2", 1), {"x": "x + s1 + s2"})
    G = hsd(Qx, tm("t", 1), {"x": "x + x*t"})

    def solver(delta, basis):
        return [delta.images[0], Qx.zero()]

    phi = generate_subst(GenerationProblem(D, G, solver))
    assert act(phi, D) == G


def test_canonical_hs(Qxy):
    D = canonical_hs(PolyRing(QQ, ("x",)), 2)
    x = D.ring.gen("x")
    assert component(D, (2,), x**2) == D.ring.one()
    from math import comb

    D2 = canonical_hs(Qxy, 4)
    for a in D2.trunc.sorted():
        for b in D2.trunc.sorted():
            w = Qxy.parse(f"x^{b[0]}*y^{b[1]}")
            if a[0] <= b[0] and a[1] <= b[1]:
                want = Qxy.parse(f"{comb(b[0], a[0]) * comb(b[1], a[1])}*x^{b[0]-a[0]}*y^{b[1]-a[1]}")
            else:
                want = Qxy.zero()
            assert component(D2, a, w) == want
    basis = first_order_basis(D2)
    assert [d.images for d in basis] == [(Qxy.one(), Qxy.zero()), (Qxy.zero(), Qxy.one())]


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_canonical_is_iterative(n, m):
    R = PolyRing(QQ, ("x", "y")[:n])
    assert is_iterative(canonical_hs(R, m))


def test_integrate(Qx):
    t1 = tm("s", 1)
    E = hsd(Qx, t1, {"x": "x + x^2*s"})
    D = integrate(E, 2, VarSet(("s",)))
    assert D.trunc == tm("s", 2)
    assert truncate_hs(D, 1) == E
    assert component(D, (1,), Qx.gen("x")) == Qx.parse("x^2")
    I2 = integrate(HSDeriv.identity(Qx, t1), 3, VarSet(("s",)))
    assert I2 == HSDeriv.identity(Qx, tm("s", 3))
    with pytest.raises(PreconditionError):
        integrate(E, 0)


def test_integrate_round_trip(Qxy):
    rng = random.Random(6)
    for _ in range(10):
        n = rng.randint(1, 2)
        E = random_hs(rng, Qxy, tm("s1,s2", n))
        m = rng.randint(n, 3)
        assert truncate_hs(integrate(E, m), n) == E


def test_integrate_stream(Qx):
    E = hsd(Qx, tm("s", 1), {"x": "x + s"})
    stream = integrate_stream(E, VarSet(("s",)))
    prev = next(stream)
    for _ in range(3):
        cur = next(stream)
        assert truncate_hs(cur, prev.trunc.max_norm) == prev
        prev = cur

import random
import threading

import pytest

from conftest import ser, subst, tm
from hsforge.algebra import GF, QQ, PolyRing
from hsforge.errors import PreconditionError, UniverseMismatch, ValidationError
from hsforge.multiindex import CoIdeal, MultiIndex, VarSet
from hsforge.oracle import direct_C, random_series, random_subst
from hsforge.substitution import (
    SubstMap,
    add,
    apply,
    apply_via_coeffs,
    check_multiplicativity_table,
    coeff,
    combinatorial,
    compose,
    has_constant_coeffs,
    identity_map,
    is_trivial,
    perturb_table,
    perturbable_entries,
    power_map,
    split_top,
    subst_from_table,
    table_from_subst,
    tensor,
    truncate_subst,
    validate,
    zero_map,
)


def test_make_and_validate(Qx):
    t2s, t2t = tm("s", 2), tm("t", 2)
    z = zero_map(Qx, t2s, t2t)
    assert is_trivial(z) and validate(z)
    assert combinatorial(Qx, t2s, t2t) == subst(Qx, {"s": "t"}, t2s, t2t)
    phi = subst(Qx, {"s": "t + t^2"}, t2s, t2t)
    assert validate(phi)


def test_validate_examples(Qx):
    t1s, t2t = tm("s", 1), tm("t", 2)
    bad = SubstMap(Qx, t1s, t2t, [ser(Qx, t2t, "t")], check=False)
    assert not validate(bad)
    with pytest.raises(ValidationError):
        subst(Qx, {"s": "t"}, t1s, t2t)
    assert validate(SubstMap(Qx, t1s, t2t, [ser(Qx, t2t, "t^2")], check=False))
    assert validate(zero_map(Qx, tm("s1,s2", 0), tm("t", 3)))


def test_nonzero_constant_term_rejected(Qx):
    with pytest.raises(ValidationError):
        subst(Qx, {"s": "1 + t"}, tm("s", 2), tm("t", 2))


def test_coeff_examples():
    R = PolyRing(QQ, ("c1", "c2", "c3"))
    phi = subst(R, {"s": "c1*t + c2*t^2 + c3*t^3"}, tm("s", 3), tm("t", 3))
    assert coeff(phi, (2,), (3,)) == R.parse("2*c1*c2")
    assert coeff(phi, (1,), (2,)) == R.parse("c2")
    assert coeff(phi, (0,), (0,)) == R.one()
    assert coeff(phi, (0,), (2,)).is_zero()
    assert coeff(phi, (3,), (3,)) == R.parse("c1^3")
    with pytest.raises(PreconditionError):
        coeff(phi, (2,), (1,))


def test_apply_examples(Qx):
    t2s, t2t = tm("s", 2), tm("t", 2)
    phi = subst(Qx, {"s": "t + t^2"}, t2s, t2t)
    assert apply(phi, ser(Qx, t2s, "1 + s")) == ser(Qx, t2t, "1 + t + t^2")
    assert apply(phi, ser(Qx, t2s, "x")) == ser(Qx, t2t, "x")
    r = ser(Qx, t2s, "x + 2*s + x*s^2")
    assert apply(zero_map(Qx, t2s, t2t), r) == ser(Qx, t2t, "x")
    with pytest.raises(UniverseMismatch):
        apply(phi, ser(Qx, t2t, "t"))


def test_apply_paths_agree_and_are_multiplicative(Qxy):
    rng = random.Random(3)
    for _ in range(30):
        src, dst = tm("s1,s2", 3), tm("t", 3)
        phi = random_subst(rng, Qxy, src, dst)
        a, b = random_series(rng, Qxy, src), random_series(rng, Qxy, src)
        assert apply(phi, a) == apply_via_coeffs(phi, a)
        assert apply(phi, a * b) == apply(phi, a) * apply(phi, b)
        assert apply(phi, a).constant_term() == a.constant_term()


def test_compose_examples(Qx):
    s, t, u = tm("s", 2), tm("t", 2), tm("u", 2)
    phi = subst(Qx, {"s": "t + x*t^2"}, s, t)
    assert compose(subst(Qx, {"t": "u"}, t, u), zero_map(Qx, s, t)) == zero_map(Qx, s, u)
    assert compose(zero_map(Qx, t, u), phi) == zero_map(Qx, s, u)
    assert compose(combinatorial(Qx, t, u), combinatorial(Qx, s, t)) == combinatorial(Qx, s, u)
    with pytest.raises(UniverseMismatch):
        compose(phi, phi)


def test_power_maps(Qx):
    t1 = tm("s", 1)
    p2 = power_map(Qx, {"s": 2}, t1)
    assert sorted(p2.dst_trunc.members) == [(0,), (1,), (2,)]
    assert power_map(Qx, {"s": 1}, tm("s", 3)) == identity_map(Qx, tm("s", 3))
    n = tm("s", 2)
    p3 = power_map(Qx, (3,), n)
    p2b = power_map(Qx, (2,), p3.dst_trunc)
    assert compose(p2b, p3) == power_map(Qx, (6,), n)


def test_add(Qx):
    s, t = tm("s", 2), tm("t", 2)
    phi = subst(Qx, {"s": "t + x*t^2"}, s, t)
    assert add(phi, zero_map(Qx, s, t)) == phi
    assert add(subst(Qx, {"s": "t"}, s, t), subst(Qx, {"s": "t^2"}, s, t)) == subst(Qx, {"s": "t+t^2"}, s, t)
    # sums need not kill the source truncation
    src = tm("s1,s2", 1)
    dst = CoIdeal.nbeta(MultiIndex(VarSet(("t1", "t2")), {"t1": 1, "t2": 1}))
    a = SubstMap(Qx, src, dst, [ser(Qx, dst, "t1"), ser(Qx, dst, "0")])
    b = SubstMap(Qx, src, dst, [ser(Qx, dst, "0"), ser(Qx, dst, "t2")])
    with pytest.raises(ValidationError):
        add(a, b)


def test_compose_distributes_over_add(Qxy):
    rng = random.Random(9)
    s, t, u = tm("s", 3), tm("t1,t2", 3), tm("u", 3)
    for _ in range(10):
        phi, phi2 = random_subst(rng, Qxy, s, t), random_subst(rng, Qxy, s, t)
        psi = random_subst(rng, Qxy, t, u)
        assert compose(psi, add(phi, phi2)) == add(compose(psi, phi), compose(psi, phi2))


def test_tensor(Qx):
    s, t, u, v = tm("s", 2), tm("t", 2), tm("u", 2), tm("v", 2)
    z = tensor(zero_map(Qx, s, t), zero_map(Qx, u, v))
    assert is_trivial(z)
    tp = tensor(combinatorial(Qx, s, t), combinatorial(Qx, u, v))
    dst = CoIdeal.product(t, v)
    assert tp.images == (ser(Qx, dst, "t"), ser(Qx, dst, "v"))
    with pytest.raises(Exception):
        tensor(combinatorial(Qx, s, t), combinatorial(Qx, s, t))


def test_tensor_coefficient_factorisation(Qxy):
    rng = random.Random(21)
    s, t, u, v = tm("s", 2), tm("t", 2), tm("u", 2), tm("v", 2)
    for _ in range(5):
        phi, psi = random_subst(rng, Qxy, s, t), random_subst(rng, Qxy, u, v)
        tp = tensor(phi, psi)
        for (a, b) in tp.src_trunc.sorted():
            for (e, f) in tp.dst_trunc.sorted():
                if a + b > e + f:
                    continue
                want = coeff(phi, (a,), (e,)) * coeff(psi, (b,), (f,)) if a <= e and b <= f else Qxy.zero()
                assert coeff(tp, (a, b), (e, f)) == want


def test_constant_coeffs(Qx):
    s, t = tm("s", 2), tm("t", 2)
    assert has_constant_coeffs(subst(Qx, {"s": "t + t^2"}, s, t))
    assert not has_constant_coeffs(subst(Qx, {"s": "x*t"}, s, t))
    assert has_constant_coeffs(zero_map(Qx, s, t))


def test_constant_coeff_maps_are_A_linear(Qxy):
    rng = random.Random(5)
    s, t = tm("s", 3), tm("t", 3)
    phi = subst(Qxy, {"s": "2*t - t^3"}, s, t)
    for _ in range(10):
        r = random_series(rng, Qxy, s)
        a = Qxy.parse("x*y + 1")
        assert apply(phi, r * a) == apply(phi, r) * a


def test_truncate_subst(Qx):
    s, t = tm("s", 2), tm("t", 2)
    phi = subst(Qx, {"s": "t + t^2"}, s, t)
    assert truncate_subst(phi, 1) == subst(Qx, {"s": "t"}, tm("s", 1), tm("t", 1))
    assert truncate_subst(phi, 5) == phi
    top, low = split_top(phi, 2)
    assert top == subst(Qx, {"s": "t^2"}, s, t) and low == subst(Qx, {"s": "t"}, s, t)
    assert add(top, low) == phi


def test_truncation_commutes_with_apply(Qxy):
    rng = random.Random(6)
    from hsforge.series import truncate

    s, t = tm("s1,s2", 3), tm("t", 3)
    for _ in range(10):
        phi = random_subst(rng, Qxy, s, t)
        r = random_series(rng, Qxy, s)
        assert truncate(apply(phi, r), t.slice(2)) == apply(truncate_subst(phi, 2), truncate(r, s.slice(2)))


def test_coeff_matches_direct_expansion(Qxy):
    rng = random.Random(8)
    for _ in range(40):
        s, t = tm("s1,s2", 3), tm("t1,t2", 3)
        phi = random_subst(rng, Qxy, s, t)
        for e in t.sorted():
            for a in s.sorted():
                if sum(a) <= sum(e):
                    assert coeff(phi, a, e) == direct_C(phi, a, e)


def test_coefficient_table_invariants(Qx):
    phi = subst(Qx, {"s": "x*t + t^2"}, tm("s", 3), tm("t", 3))
    K = table_from_subst(phi)
    assert K.get((0,), (0,)) == Qx.one()
    for e in phi.dst_trunc.sorted():
        if any(e):
            assert K.get(e, (0,)).is_zero()


def test_multiplicativity_examples(Qx):
    phi = subst(Qx, {"s": "x*t + t^2"}, tm("s", 3), tm("t", 3))
    K = table_from_subst(phi)
    assert check_multiplicativity_table(K)
    assert check_multiplicativity_table(table_from_subst(zero_map(Qx, tm("s", 3), tm("t", 3))))
    for key in perturbable_entries(K):
        assert not check_multiplicativity_table(perturb_table(K, key))
    assert subst_from_table(K) == phi


def test_concurrent_coeff_is_deterministic(Qxy):
    rng = random.Random(10)
    s, t = tm("s1,s2", 3), tm("t1,t2", 3)
    phi = random_subst(rng, Qxy, s, t)
    keys = [(a, e) for e in t.sorted() for a in s.sorted() if sum(a) <= sum(e)]
    expected = {k: direct_C(phi, *k) for k in keys}
    results = []

    def work():
        results.append({k: coeff(phi, *k) for k in keys})

    threads = [threading.Thread(target=work) for _ in range(4)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert all(r == expected for r in results)


def test_gf_coefficients():
    R = PolyRing(GF(3), ("x",))
    phi = subst(R, {"s": "t + t^2"}, tm("s", 3), tm("t", 3))
    # (t + t^2)^3 = t^3 in characteristic 3
    assert coeff(phi, (3,), (3,)) == R.one()
    assert coeff(phi, (2,), (3,)) == R.const(2)

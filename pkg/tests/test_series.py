import math
import random

import pytest

from conftest import ser, tm
from hsforge.algebra import GF, QQ, PolyRing
from hsforge.errors import NotAUnit, PreconditionError, UniverseMismatch, ValidationError
from hsforge.multiindex import CoIdeal
from hsforge.oracle import random_series, random_unit
from hsforge.series import Series, external_product, invert_partition, invert_recursive, is_unit, truncate


def test_add_and_order(Qx):
    t = tm("s", 2)
    assert ser(Qx, t, "1 + x*s") + ser(Qx, t, "1 - x*s") == ser(Qx, t, "2")
    a = ser(Qx, t, "x + s^2")
    assert a + Series.zero(Qx, t.vars, t) == a
    assert ser(Qx, t, "s").order() == 1 and ser(Qx, t, "s + s^2").order() == 1
    assert Series.zero(Qx, t.vars, t).order() == math.inf


def test_mul_examples(Qxy):
    assert ser(Qxy, tm("s", 2), "(1+s)*(1-s)") == ser(Qxy, tm("s", 2), "1 - s^2")
    t1 = tm("s", 1)
    assert ser(Qxy, t1, "1+s") * ser(Qxy, t1, "1-s") == ser(Qxy, t1, "1")
    t = tm("s1,s2", 2)
    assert ser(Qxy, t, "x*s1") * ser(Qxy, t, "y*s2") == ser(Qxy, t, "x*y*s1*s2")


def test_universe_mismatch(Qx):
    with pytest.raises(UniverseMismatch):
        ser(Qx, tm("s", 2), "s") + ser(Qx, tm("s", 3), "s")


def test_parse_rejects_name_clash(Qx):
    with pytest.raises(ValidationError):
        ser(Qx, tm("x", 2), "x")


def test_truncate(Qx):
    t2, t1 = tm("s", 2), tm("s", 1)
    a = ser(Qx, t2, "1 + s + s^2")
    assert truncate(a, t1) == ser(Qx, t1, "1 + s")
    assert truncate(a, t2) == a
    t0 = tm("s", 0)
    assert truncate(ser(Qx, t2, "x + s"), t0) == ser(Qx, t0, "x")
    with pytest.raises(PreconditionError):
        truncate(ser(Qx, t1, "s"), t2)


def test_truncation_is_a_ring_map(Qxy):
    rng = random.Random(7)
    t3 = tm("s1,s2", 3)
    t1 = t3.slice(1)
    for _ in range(20):
        a, b = random_series(rng, Qxy, t3), random_series(rng, Qxy, t3)
        assert truncate(a * b, t1) == truncate(a, t1) * truncate(b, t1)
        assert truncate(a + b, t1) == truncate(a, t1) + truncate(b, t1)


def test_is_unit(Qx):
    t = tm("s", 2)
    assert is_unit(ser(Qx, t, "1 + x*s"))
    assert not is_unit(ser(Qx, t, "x + s"))
    assert is_unit(ser(Qx, t, "2 + s"))


def test_invert_examples(Qx):
    t3 = tm("s", 3)
    assert invert_recursive(ser(Qx, t3, "1+s")) == ser(Qx, t3, "1 - s + s^2 - s^3")
    assert invert_recursive(ser(Qx, t3, "1")) == ser(Qx, t3, "1")
    t2 = tm("s", 2)
    assert invert_recursive(ser(Qx, t2, "1 + x*s + s^2")) == ser(Qx, t2, "1 - x*s + (x^2-1)*s^2")
    assert invert_partition(ser(Qx, t3, "1+s")) == ser(Qx, t3, "1 - s + s^2 - s^3")


def test_invert_partition_low_degrees():
    R = PolyRing(QQ, ("a", "b"))
    t = tm("s", 2)
    inv = invert_partition(ser(R, t, "1 + a*s + b*s^2"))
    assert inv.coeff((1,)) == R.parse("-a")
    assert inv.coeff((2,)) == R.parse("a^2 - b")


def test_invert_errors(Qx):
    t = tm("s", 2)
    with pytest.raises(NotAUnit):
        invert_recursive(ser(Qx, t, "x + s"))
    with pytest.raises(NotAUnit):
        invert_partition(ser(Qx, t, "2 + s"))
    two = ser(Qx, t, "2 + s")
    assert two * invert_recursive(two) == ser(Qx, t, "1")


@pytest.mark.parametrize("field", [QQ, GF(5)])
def test_inversion_properties(field):
    R = PolyRing(field, ("x", "y"))
    rng = random.Random(11)
    for m in range(5):
        t = tm("s1,s2", m)
        for _ in range(5):
            r = random_unit(rng, R, t)
            inv = invert_recursive(r)
            assert inv == invert_partition(r)
            assert invert_recursive(inv) == r


def test_ring_axioms_and_order_bounds(Qxy):
    rng = random.Random(13)
    t = tm("s1,s2", 3)
    for _ in range(20):
        a, b, c = (random_series(rng, Qxy, t) for _ in range(3))
        assert a * (b + c) == a * b + a * c
        assert (a * b) * c == a * (b * c)
        assert (a * b).order() >= a.order() + b.order()
        assert (a + b).order() >= min(a.order(), b.order())
    m = ser(Qxy, t, "s1 + x*s2")
    m2 = ser(Qxy, t, "s1^2 + s1*s2")
    assert (m + m2).order() == m.order()


def test_external_product(Qxy):
    s, u = tm("s", 2), tm("t", 2)
    big = CoIdeal.product(s, u)
    e = external_product(ser(Qxy, s, "1+s"), ser(Qxy, u, "1+t"))
    assert e == ser(Qxy, big, "1 + s + t + s*t")
    assert external_product(ser(Qxy, s, "x*s"), ser(Qxy, u, "y*t")) == ser(Qxy, big, "x*y*s*t")
    r = ser(Qxy, s, "x + s + y*s^2")
    assert external_product(r, ser(Qxy, u, "1")) == ser(Qxy, big, "x + s + y*s^2")


def test_external_product_laws(Qxy):
    rng = random.Random(17)
    s, u = tm("s", 3), tm("t", 2)
    for _ in range(10):
        r, r2 = random_unit(rng, Qxy, s), random_unit(rng, Qxy, u)
        assert invert_recursive(external_product(r, r2)) == external_product(invert_recursive(r), invert_recursive(r2))
        e = external_product(r, r2)
        small = CoIdeal.product(s.slice(1), u.slice(1))
        assert truncate(e, small) == external_product(truncate(r, s.slice(1)), truncate(r2, u.slice(1)))


def test_external_name_clash(Qx):
    with pytest.raises(PreconditionError):
        external_product(ser(Qx, tm("s", 1), "s"), ser(Qx, tm("s", 1), "s"))

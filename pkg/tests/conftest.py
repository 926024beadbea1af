import random

import pytest

from hsforge import GF, QQ, CoIdeal, HSDeriv, PolyRing, Series, VarSet, make_subst


def tm(names, m):
    if isinstance(names, str):
        names = tuple(n for n in names.split(",") if n)
    return CoIdeal.tm(VarSet(tuple(names)), m)


def ser(ring, trunc, text):
    return Series.parse(ring, trunc.vars, trunc, text)


def subst(ring, images, src, dst):
    return make_subst(images, src, dst, ring)


def hsd(ring, trunc, images):
    return HSDeriv.parse(ring, trunc, images)


@pytest.fixture
def Qx():
    return PolyRing(QQ, ("x",))


@pytest.fixture
def Qxy():
    return PolyRing(QQ, ("x", "y"))


@pytest.fixture
def F5x():
    return PolyRing(GF(5), ("x",))


@pytest.fixture
def F2x():
    return PolyRing(GF(2), ("x",))


@pytest.fixture
def rng():
    return random.Random(20240611)

"""Truncated power series A[[s]]_Delta over a finite co-ideal Delta."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Mapping

from .algebra import Poly, PolyRing
from .errors import NotAUnit, PreconditionError, UniverseMismatch, ValidationError
from .multiindex import (
    CoIdeal,
    Exps,
    MultiIndex,
    VarSet,
    as_exps,
    grlex_key,
    leq_exps,
    ordered_partitions_exps,
    sub_exps,
)


class Series:
    """A sparse element of A[[vars]]_trunc with polynomial coefficients."""

    __slots__ = ("ring", "vars", "trunc", "coeffs", "_hash")

    def __init__(self, ring: PolyRing, vars: VarSet, trunc: CoIdeal, coeffs: Mapping | None = None, check: bool = True):
        if trunc.vars != vars:
            raise UniverseMismatch(f"truncation over {trunc.vars}, series over {vars}")
        clean = {}
        if coeffs:
            for a, c in coeffs.items():
                if check:
                    if not isinstance(a, tuple):
                        a = as_exps(vars, a)
                    if a not in trunc.members:
                        raise ValidationError(f"index {MultiIndex(vars, a)} outside the truncation {trunc}")
                    if not isinstance(c, Poly):
                        c = ring.const(c)
                    elif c.ring != ring:
                        raise UniverseMismatch("coefficient over a different ring")
                if c:
                    clean[a] = c
        self.ring = ring
        self.vars = vars
        self.trunc = trunc
        self.coeffs = clean
        self._hash = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, ring, vars, trunc) -> "Series":
        return cls(ring, vars, trunc, {}, check=False)

    @classmethod
    def constant(cls, ring, vars, trunc, c) -> "Series":
        if not isinstance(c, Poly):
            c = ring.const(c)
        return cls(ring, vars, trunc, {vars.zero(): c})

    @classmethod
    def one(cls, ring, vars, trunc) -> "Series":
        return cls.constant(ring, vars, trunc, ring.one())

    @classmethod
    def monomial(cls, ring, vars, trunc, alpha, c=1) -> "Series":
        a = alpha if isinstance(alpha, tuple) else as_exps(vars, alpha)
        if a not in trunc.members:
            return cls.zero(ring, vars, trunc)
        return cls(ring, vars, trunc, {a: c})

    @classmethod
    def variable(cls, ring, vars, trunc, name: str) -> "Series":
        return cls.monomial(ring, vars, trunc, vars.unit(name))

    @classmethod
    def parse(cls, ring: PolyRing, vars: VarSet, trunc: CoIdeal, text: str) -> "Series":
        """Read an expression in the ring generators and series variables.

        Terms outside the truncation are dropped.
        """
        overlap = set(ring.gens) & set(vars.names)
        if overlap:
            raise ValidationError(f"names used both as generators and series variables: {sorted(overlap)}")
        big = PolyRing(ring.field, ring.gens + vars.names)
        p = big.parse(text)
        n = ring.ngens
        coeffs: dict = {}
        for e, c in p.terms.items():
            a = e[n:]
            if a in trunc.members:
                coeffs.setdefault(a, {})[e[:n]] = c
        return cls(ring, vars, trunc, {a: Poly(ring, t) for a, t in coeffs.items()}, check=False)

    # -- access ---------------------------------------------------------------
    def coeff(self, alpha) -> Poly:
        a = alpha if isinstance(alpha, tuple) else as_exps(self.vars, alpha)
        c = self.coeffs.get(a)
        return c if c is not None else self.ring.zero()

    def constant_term(self) -> Poly:
        return self.coeff(self.vars.zero())

    def support(self) -> list[Exps]:
        return sorted(self.coeffs, key=grlex_key)

    def items(self):
        """(exps, Poly) pairs in ascending graded order."""
        return [(a, self.coeffs[a]) for a in self.support()]

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def order(self):
        """Smallest norm in the support; ``math.inf`` for the zero series."""
        return min((sum(a) for a in self.coeffs), default=math.inf)

    def universe(self):
        return (self.ring, self.vars, self.trunc)

    def _check(self, other: "Series"):
        if not isinstance(other, Series):
            raise TypeError(f"expected Series, got {type(other).__name__}")
        if self.ring != other.ring or self.vars != other.vars or self.trunc != other.trunc:
            raise UniverseMismatch(
                f"series over ({self.ring}, {self.vars}, {self.trunc}) and ({other.ring}, {other.vars}, {other.trunc})"
            )

    def _same_universe(self, coeffs) -> "Series":
        return Series(self.ring, self.vars, self.trunc, coeffs, check=False)

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Series):
            return self + Series.constant(self.ring, self.vars, self.trunc, other)
        self._check(other)
        out = dict(self.coeffs)
        for a, c in other.coeffs.items():
            prev = out.get(a)
            out[a] = c if prev is None else prev + c
        return self._same_universe(out)

    __radd__ = __add__

    def __neg__(self):
        return self._same_universe({a: -c for a, c in self.coeffs.items()})

    def __sub__(self, other):
        if not isinstance(other, Series):
            return self - Series.constant(self.ring, self.vars, self.trunc, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Series):
            self._check(other)
            members = self.trunc.members
            out: dict = {}
            for a, ca in self.coeffs.items():
                for b, cb in other.coeffs.items():
                    k = tuple(x + y for x, y in zip(a, b))
                    if k in members:
                        prev = out.get(k)
                        prod = ca * cb
                        out[k] = prod if prev is None else prev + prod
            return self._same_universe(out)
        if isinstance(other, Poly):
            if other.ring != self.ring:
                raise UniverseMismatch("scalar polynomial over a different ring")
            return self._same_universe({a: c * other for a, c in self.coeffs.items()})
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self._same_universe({a: c.scale(other) for a, c in self.coeffs.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise PreconditionError("negative power of a series")
        result = Series.one(self.ring, self.vars, self.trunc)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def shift(self, alpha: Exps) -> "Series":
        """Multiply by the monomial s^alpha (truncated)."""
        members = self.trunc.members
        out = {}
        for a, c in self.coeffs.items():
            k = tuple(x + y for x, y in zip(a, alpha))
            if k in members:
                out[k] = c
        return self._same_universe(out)

    def map_coeffs(self, fn) -> "Series":
        return Series(self.ring, self.vars, self.trunc, {a: fn(c) for a, c in self.coeffs.items()}, check=False)

    def embed(self, vars: VarSet, trunc: CoIdeal, positions) -> "Series":
        """Re-index into a larger variable set; ``positions[i]`` is the new slot of variable i."""
        out = {}
        n = len(vars)
        for a, c in self.coeffs.items():
            k = [0] * n
            for i, x in enumerate(a):
                k[positions[i]] += x
            k = tuple(k)
            if k in trunc.members:
                out[k] = c
        return Series(self.ring, vars, trunc, out, check=False)

    # -- comparison -----------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Series):
            return (
                self.ring == other.ring
                and self.vars == other.vars
                and self.trunc == other.trunc
                and self.coeffs == other.coeffs
            )
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.coeffs.items())))
        return self._hash

    def __repr__(self):
        return format_series(self)


def format_series(f: Series) -> str:
    from .algebra import _fmt_monomial

    if not f.coeffs:
        return "0"
    out = []
    for a, c in f.items():
        mono = _fmt_monomial(f.vars.names, a)
        cs = repr(c)
        neg = len(c.terms) == 1 and cs.startswith("-")
        if neg:
            cs = cs[1:]
        if not mono:
            body = cs
        elif cs == "1":
            body = mono
        elif len(c.terms) == 1:
            body = f"{cs}*{mono}"
        else:
            body = f"({cs})*{mono}"
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


def series_add(a: Series, b: Series) -> Series:
    return a + b


def series_mul(a: Series, b: Series) -> Series:
    return a * b


def truncate(a: Series, delta2: CoIdeal) -> Series:
    """Drop coefficients outside ``delta2``; it must be a sub-co-ideal."""
    if not delta2.is_subset(a.trunc):
        raise PreconditionError(f"{delta2} is not a sub-co-ideal of {a.trunc}")
    return Series(a.ring, a.vars, delta2, {k: c for k, c in a.coeffs.items() if k in delta2.members}, check=False)


def augmentation(a: Series) -> Poly:
    return a.constant_term()


def is_unit(a: Series) -> bool:
    """Units of A[[s]]_Delta are the series whose constant term is a unit of A."""
    c0 = a.constant_term()
    return bool(c0) and c0.is_constant()


def invert_recursive(a: Series) -> Series:
    """Inverse computed degree by degree from the constant term."""
    if not is_unit(a):
        raise NotAUnit(f"constant term {a.constant_term()} is not invertible")
    ring = a.ring
    inv0 = ring.field.inv(a.constant_term().constant_value())
    zero = a.vars.zero()
    nonconst = [(b, c) for b, c in a.coeffs.items() if b != zero]
    out: dict = {zero: ring.const(inv0)}
    for alpha in a.trunc.sorted():
        if alpha == zero:
            continue
        acc = None
        for b, c in nonconst:
            if leq_exps(b, alpha):
                g = out.get(sub_exps(alpha, b))
                if g is not None:
                    t = c * g
                    acc = t if acc is None else acc + t
        if acc is not None and acc:
            out[alpha] = acc.scale(-inv0)
    return Series(ring, a.vars, a.trunc, out, check=False)


def invert_partition(a: Series) -> Series:
    """Closed-form inverse of a series with constant term exactly 1.

    The coefficient at alpha is the signed sum over ordered partitions of
    alpha into d nonzero parts of the products of the matching coefficients.
    """
    ring = a.ring
    if a.constant_term() != ring.one():
        raise NotAUnit("the partition formula needs constant term 1")
    zero = a.vars.zero()
    out = {zero: ring.one()}
    for alpha in a.trunc.sorted():
        n = sum(alpha)
        if n == 0:
            continue
        acc = ring.zero()
        for d in range(1, n + 1):
            sub = ring.zero()
            for parts in ordered_partitions_exps(alpha, d):
                prod = ring.one()
                for p in parts:
                    c = a.coeffs.get(p)
                    if c is None:
                        prod = None
                        break
                    prod = prod * c
                if prod is not None:
                    sub = sub + prod
            acc = acc - sub if d % 2 else acc + sub
        if acc:
            out[alpha] = acc
    return Series(ring, a.vars, a.trunc, out, check=False)


def external_product(a: Series, b: Series) -> Series:
    """a x b over the disjoint union of the variable sets, coefficient a_alpha * b_beta."""
    if a.ring != b.ring:
        raise UniverseMismatch("external product of series over different rings")
    vars = a.vars.disjoint_union(b.vars)
    trunc = CoIdeal.product(a.trunc, b.trunc)
    out = {}
    for x, cx in a.coeffs.items():
        for y, cy in b.coeffs.items():
            out[x + y] = cx * cy
    return Series(a.ring, vars, trunc, out, check=False)

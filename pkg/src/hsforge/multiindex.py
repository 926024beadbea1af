"""Multi-indices over a finite ordered variable set, co-ideals, partitions.

Internally an exponent vector is a plain tuple of non-negative ints aligned
with a :class:`VarSet`; :class:`MultiIndex` wraps one together with its
ambient variable set for the public API.  Every container in the package
keys on the raw tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import Cancelled, PreconditionError, UniverseMismatch, ValidationError

Exps = tuple  # tuple[int, ...]


@dataclass(frozen=True)
class VarSet:
    """A finite ordered set of variable names (possibly empty)."""

    names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if len(set(self.names)) != len(self.names):
            raise ValidationError(f"duplicate variable names in {self.names}")
        for n in self.names:
            if not isinstance(n, str) or not n:
                raise ValidationError(f"bad variable name {n!r}")

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name):
        return name in self.names

    def __repr__(self):
        return f"VarSet({list(self.names)})"

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"unknown variable {name!r} (have {list(self.names)})") from None

    def zero(self) -> Exps:
        return (0,) * len(self.names)

    def unit(self, name: str) -> Exps:
        i = self.index(name)
        return tuple(1 if j == i else 0 for j in range(len(self.names)))

    def units(self) -> list[Exps]:
        return [self.unit(n) for n in self.names]

    def disjoint_union(self, other: "VarSet") -> "VarSet":
        clash = set(self.names) & set(other.names)
        if clash:
            raise PreconditionError(f"variable sets overlap on {sorted(clash)}")
        return VarSet(self.names + other.names)

    def primed(self, suffix: str = "'") -> "VarSet":
        return VarSet(tuple(n + suffix for n in self.names))


# -- raw exponent-vector helpers ---------------------------------------------


def norm(a: Exps) -> int:
    return sum(a)


def add_exps(a: Exps, b: Exps) -> Exps:
    return tuple(x + y for x, y in zip(a, b))


def sub_exps(a: Exps, b: Exps) -> Exps:
    return tuple(x - y for x, y in zip(a, b))


def leq_exps(a: Exps, b: Exps) -> bool:
    return all(x <= y for x, y in zip(a, b))


def join_exps(a: Exps, b: Exps) -> Exps:
    return tuple(max(x, y) for x, y in zip(a, b))


def grlex_key(a: Exps):
    """Sort key: ascending norm, then earlier variables first."""
    return (sum(a), tuple(-x for x in a))


def below_exps(b: Exps) -> list[Exps]:
    return sorted(itertools.product(*(range(x + 1) for x in b)), key=grlex_key)


def exps_of_norm(n_vars: int, total: int) -> list[Exps]:
    """All exponent vectors in ``n_vars`` variables with the given norm."""
    if n_vars == 0:
        return [()] if total == 0 else []
    out = []
    for first in range(total, -1, -1):
        for rest in exps_of_norm(n_vars - 1, total - first):
            out.append((first,) + rest)
    return out


def _check_cancel(cancel):
    if cancel is not None and cancel.is_set():
        raise Cancelled("enumeration cancelled")


# -- MultiIndex ---------------------------------------------------------------


class MultiIndex:
    """An element of N^(s): a finitely supported exponent map on ``vars``."""

    __slots__ = ("vars", "exps")

    def __init__(self, vars: VarSet, exps: Sequence[int] | Mapping[str, int] | None = None, **named):
        if exps is None:
            exps = named
        if isinstance(exps, Mapping):
            vec = [0] * len(vars)
            for name, k in exps.items():
                vec[vars.index(name)] = int(k)
            exps = vec
        exps = tuple(int(k) for k in exps)
        if len(exps) != len(vars):
            raise ValidationError(f"exponent vector {exps} does not match {vars}")
        if any(k < 0 for k in exps):
            raise ValidationError(f"negative exponent in {exps}")
        self.vars = vars
        self.exps = exps

    @property
    def norm(self) -> int:
        return sum(self.exps)

    def support(self) -> list[str]:
        return [n for n, k in zip(self.vars.names, self.exps) if k]

    def to_dict(self) -> dict[str, int]:
        return {n: k for n, k in zip(self.vars.names, self.exps) if k}

    def is_zero(self) -> bool:
        return not any(self.exps)

    def _same(self, other: "MultiIndex"):
        if not isinstance(other, MultiIndex):
            return NotImplemented
        if self.vars != other.vars:
            raise UniverseMismatch(f"multi-indices over {self.vars} and {other.vars}")
        return True

    def __add__(self, other):
        if self._same(other) is NotImplemented:
            return NotImplemented
        return MultiIndex(self.vars, add_exps(self.exps, other.exps))

    def __sub__(self, other):
        self._same(other)
        diff = sub_exps(self.exps, other.exps)
        if any(k < 0 for k in diff):
            raise PreconditionError(f"{other} is not below {self}")
        return MultiIndex(self.vars, diff)

    def __le__(self, other):
        if self._same(other) is NotImplemented:
            return NotImplemented
        return leq_exps(self.exps, other.exps)

    def __ge__(self, other):
        return other.__le__(self)

    def __lt__(self, other):
        return self <= other and self != other

    def __gt__(self, other):
        return other < self

    def __or__(self, other):
        self._same(other)
        return MultiIndex(self.vars, join_exps(self.exps, other.exps))

    def __eq__(self, other):
        if isinstance(other, MultiIndex):
            return self.vars == other.vars and self.exps == other.exps
        return NotImplemented

    def __hash__(self):
        return hash((self.vars, self.exps))

    def __repr__(self):
        inner = ",".join(f"{n}:{k}" for n, k in self.to_dict().items())
        return f"({inner})" if inner else "0"


def as_exps(vars: VarSet, alpha) -> Exps:
    """Coerce a MultiIndex, mapping or tuple to a raw exponent vector over ``vars``."""
    if isinstance(alpha, MultiIndex):
        if alpha.vars != vars:
            raise UniverseMismatch(f"multi-index over {alpha.vars}, expected {vars}")
        return alpha.exps
    return MultiIndex(vars, alpha).exps


def add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return a + b


def leq(a: MultiIndex, b: MultiIndex) -> bool:
    return a <= b


def join(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return a | b


def below(b: MultiIndex) -> list[MultiIndex]:
    """All alpha <= b, in graded order; there are prod(b_s + 1) of them."""
    return [MultiIndex(b.vars, e) for e in below_exps(b.exps)]


# -- co-ideals ----------------------------------------------------------------


class CoIdeal:
    """A finite, non-empty, downward-closed set of multi-indices."""

    __slots__ = ("vars", "members", "max_norm", "descriptor", "_sorted")

    def __init__(self, vars: VarSet, members: Iterable, descriptor=None, check: bool = True):
        mem = frozenset(as_exps(vars, a) if not isinstance(a, tuple) else a for a in members)
        if check:
            zero = vars.zero()
            if zero not in mem:
                raise ValidationError("co-ideal must contain the zero index")
            for a in mem:
                if len(a) != len(vars) or any(k < 0 for k in a):
                    raise ValidationError(f"bad member {a} for {vars}")
                for i, k in enumerate(a):
                    if k and a[:i] + (k - 1,) + a[i + 1:] not in mem:
                        raise ValidationError(f"member set is not downward closed at {a}")
        self.vars = vars
        self.members = mem
        self.max_norm = max(sum(a) for a in mem)
        self.descriptor = descriptor or ("explicit",)
        self._sorted = None

    # constructors
    @classmethod
    def tm(cls, vars: VarSet, m: int) -> "CoIdeal":
        if m < 0:
            raise PreconditionError("t_m needs m >= 0")
        mem = [e for n in range(m + 1) for e in exps_of_norm(len(vars), n)]
        return cls(vars, mem, descriptor=("tm", m), check=False)

    @classmethod
    def nbeta(cls, beta: MultiIndex) -> "CoIdeal":
        return cls(beta.vars, below_exps(beta.exps), descriptor=("nbeta", beta.exps), check=False)

    @classmethod
    def explicit(cls, vars: VarSet, members: Iterable) -> "CoIdeal":
        return cls(vars, members)

    @classmethod
    def product(cls, a: "CoIdeal", b: "CoIdeal") -> "CoIdeal":
        """The co-ideal a x b over the disjoint union of the variable sets."""
        vars = a.vars.disjoint_union(b.vars)
        return cls(vars, [x + y for x in a.members for y in b.members], check=False)

    # queries
    def __contains__(self, alpha) -> bool:
        if not isinstance(alpha, tuple):
            alpha = as_exps(self.vars, alpha)
        return alpha in self.members

    def __len__(self):
        return len(self.members)

    def __iter__(self) -> Iterator[Exps]:
        return iter(self.sorted())

    def sorted(self) -> list[Exps]:
        if self._sorted is None:
            self._sorted = sorted(self.members, key=grlex_key)
        return self._sorted

    def of_norm(self, n: int) -> list[Exps]:
        return [a for a in self.sorted() if sum(a) == n]

    def multi_indices(self) -> list[MultiIndex]:
        return [MultiIndex(self.vars, a) for a in self.sorted()]

    def is_subset(self, other: "CoIdeal") -> bool:
        return self.vars == other.vars and self.members <= other.members

    def is_tm(self) -> bool:
        return self == CoIdeal.tm(self.vars, self.max_norm)

    def _same(self, other: "CoIdeal"):
        if self.vars != other.vars:
            raise UniverseMismatch(f"co-ideals over {self.vars} and {other.vars}")

    def __and__(self, other: "CoIdeal") -> "CoIdeal":
        self._same(other)
        return CoIdeal(self.vars, self.members & other.members, check=False)

    def __or__(self, other: "CoIdeal") -> "CoIdeal":
        self._same(other)
        return CoIdeal(self.vars, self.members | other.members, check=False)

    def slice(self, m: int) -> "CoIdeal":
        """Delta^m = Delta intersected with t_m."""
        if m >= self.max_norm:
            return self
        return CoIdeal(self.vars, [a for a in self.members if sum(a) <= m], check=False)

    def __eq__(self, other):
        if isinstance(other, CoIdeal):
            return self.vars == other.vars and self.members == other.members
        return NotImplemented

    def __hash__(self):
        return hash((self.vars, self.members))

    def __repr__(self):
        kind = self.descriptor[0]
        if kind == "tm":
            return f"t_{self.descriptor[1]}({','.join(self.vars)})"
        if kind == "nbeta":
            return f"n_{MultiIndex(self.vars, self.descriptor[1])!r}"
        return f"CoIdeal({[MultiIndex(self.vars, a) for a in self.sorted()]})"


def coideal_tm(vars: VarSet, m: int) -> CoIdeal:
    return CoIdeal.tm(vars, m)


def intersection(a: CoIdeal, b: CoIdeal) -> CoIdeal:
    return a & b


def union(a: CoIdeal, b: CoIdeal) -> CoIdeal:
    return a | b


def minimal_outside(delta: CoIdeal, norm_cap: int) -> list[MultiIndex]:
    """Minimal elements of the complement of ``delta`` with norm <= norm_cap.

    An index outside a co-ideal is minimal exactly when every immediate
    predecessor lies inside, so only the boundary has to be scanned.
    """
    if norm_cap < 0:
        raise PreconditionError("norm_cap must be >= 0")
    return [MultiIndex(delta.vars, a) for a in minimal_outside_exps(delta, norm_cap)]


def minimal_outside_exps(delta: CoIdeal, norm_cap: int) -> list[Exps]:
    found = set()
    units = delta.vars.units()
    for a in delta.members:
        if sum(a) + 1 > norm_cap:
            continue
        for u in units:
            b = add_exps(a, u)
            if b in delta.members or b in found:
                continue
            if all(b[:i] + (k - 1,) + b[i + 1:] in delta.members for i, k in enumerate(b) if k):
                found.add(b)
    return sorted(found, key=grlex_key)


# -- partitions ---------------------------------------------------------------


@lru_cache(maxsize=None)
def ordered_partitions_exps(alpha: Exps, d: int) -> tuple:
    """All d-tuples of nonzero exponent vectors summing to ``alpha``.

    Lexicographic on the sequence of parts, parts compared by ``grlex_key``.
    """
    if d == 0:
        return ((),) if not any(alpha) else ()
    total = sum(alpha)
    if total < d:
        return ()
    if d == 1:
        return ((alpha,),)
    out = []
    for beta in below_exps(alpha):
        nb = sum(beta)
        if nb == 0 or total - nb < d - 1:
            continue
        rest = sub_exps(alpha, beta)
        for tail in ordered_partitions_exps(rest, d - 1):
            out.append((beta,) + tail)
    return tuple(out)


def enum_ordered_partitions(alpha: MultiIndex, d: int, cancel=None) -> list[tuple[MultiIndex, ...]]:
    """Par(alpha, d) as tuples of MultiIndex."""
    if d < 0:
        raise PreconditionError("d must be non-negative")
    out = []
    for parts in ordered_partitions_exps(alpha.exps, d):
        _check_cancel(cancel)
        out.append(tuple(MultiIndex(alpha.vars, p) for p in parts))
    return out


def slots(alpha: Exps) -> list[tuple[int, int]]:
    """The finite set [alpha] = {(t, r) | 1 <= r <= alpha_t}, t as a position."""
    return [(t, r) for t, k in enumerate(alpha) for r in range(1, k + 1)]


@dataclass(frozen=True)
class IndexedPartition:
    """A map [alpha] -> N^(u) minus 0 whose values add up to ``total``."""

    shape: MultiIndex
    total: MultiIndex
    assignment: tuple  # ((var_name, r), MultiIndex) pairs in slot order

    def as_dict(self) -> dict:
        return dict(self.assignment)


def enum_indexed_partitions(e: MultiIndex, alpha: MultiIndex, cancel=None) -> list[IndexedPartition]:
    """Par(e, alpha); empty when |alpha| > |e|, one empty map for (0, 0)."""
    sl = [(alpha.vars.names[t], r) for t, r in slots(alpha.exps)]
    out = []
    for parts in ordered_partitions_exps(e.exps, len(sl)):
        _check_cancel(cancel)
        assignment = tuple(zip(sl, (MultiIndex(e.vars, p) for p in parts)))
        out.append(IndexedPartition(alpha, e, assignment))
    return out


def split_pairs(alpha: Exps) -> list[tuple[Exps, Exps]]:
    """All (beta, gamma) with beta + gamma = alpha."""
    return [(b, sub_exps(alpha, b)) for b in below_exps(alpha)]

"""Exact coefficients: the field k (Q or GF(p)) and A = k[x_1, ..., x_n].

Scalars are plain Python numbers.  Over Q a scalar is an ``int`` or a
non-integral ``Fraction``; over GF(p) it is an ``int`` in ``range(p)``.
Arithmetic on polynomial terms is done with the ordinary operators and the
field only normalizes results, which keeps the inner loops cheap.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import ParseError, PreconditionError, UniverseMismatch, UnsupportedGeneratingSet, ValidationError
from .multiindex import add_exps, grlex_key


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


class Field:
    """Q when ``p == 0``, otherwise the prime field GF(p)."""

    __slots__ = ("p",)

    def __init__(self, p: int = 0):
        if p and not _is_prime(p):
            raise ValidationError(f"GF({p}): {p} is not prime")
        self.p = p

    @classmethod
    def rationals(cls) -> "Field":
        return cls(0)

    @classmethod
    def gf(cls, p: int) -> "Field":
        return cls(p)

    @property
    def characteristic(self) -> int:
        return self.p

    def normalize(self, c):
        p = self.p
        if p:
            if type(c) is not int:
                c = Fraction(c)
                return (c.numerator * pow(c.denominator, -1, p)) % p
            return c % p
        if type(c) is Fraction and c.denominator == 1:
            return c.numerator
        return c

    def coerce(self, v):
        if isinstance(v, str):
            try:
                v = Fraction(v.strip())
            except ValueError:
                raise ParseError(f"bad scalar {v!r}") from None
        elif isinstance(v, bool) or not isinstance(v, (int, Fraction)):
            raise ParseError(f"bad scalar {v!r}")
        if self.p and isinstance(v, Fraction) and v.denominator % self.p == 0:
            raise ParseError(f"{v} has no image in GF({self.p})")
        return self.normalize(v)

    def inv(self, c):
        if c == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.p:
            return pow(c, -1, self.p)
        return self.normalize(Fraction(1) / c)

    def to_json(self, c):
        return c if self.p else str(c)

    def fmt(self, c) -> str:
        return str(c)

    def header(self) -> dict:
        return {"field": "GF", "p": self.p} if self.p else {"field": "Q"}

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def __repr__(self):
        return f"GF({self.p})" if self.p else "QQ"


QQ = Field(0)


def GF(p: int) -> Field:
    return Field(p)


@dataclass(frozen=True)
class PolyRing:
    """k[x_1, ..., x_n] with a fixed generator order."""

    field: Field
    gens: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "gens", tuple(self.gens))
        if len(set(self.gens)) != len(self.gens):
            raise ValidationError(f"duplicate generators {self.gens}")

    @property
    def ngens(self) -> int:
        return len(self.gens)

    def zero(self) -> "Poly":
        return Poly(self, {}, normalize=False)

    def one(self) -> "Poly":
        return self.const(1)

    def const(self, c) -> "Poly":
        return Poly(self, {(0,) * len(self.gens): c})

    def monomial(self, exps: Sequence[int], c=1) -> "Poly":
        return Poly(self, {tuple(exps): c})

    def gen(self, which) -> "Poly":
        i = self.gens.index(which) if isinstance(which, str) else which
        return self.monomial(tuple(1 if j == i else 0 for j in range(len(self.gens))))

    def generators(self) -> list["Poly"]:
        return [self.gen(i) for i in range(len(self.gens))]

    def monomials_up_to(self, degree: int) -> list["Poly"]:
        from .multiindex import exps_of_norm

        return [self.monomial(e) for d in range(degree + 1) for e in exps_of_norm(len(self.gens), d)]

    def parse(self, text: str) -> "Poly":
        """Parse an expression such as ``"x^2*y - 3/2*x + 1"``."""
        src = text.replace("^", "**")
        if re.search(r"[^\w\s+\-*/()]", src):
            raise ParseError(f"unexpected character in {text!r}")
        # integers become field constants, except exponents, which stay plain ints
        src = re.sub(
            r"(\*\*\s*)?(?<![\w.])(\d+)(?![\w.])",
            lambda m: m.group(0) if m.group(1) else f"_C({m.group(2)})",
            src,
        )
        env = {"_C": self.const, "__builtins__": {}}
        env.update(zip(self.gens, self.generators()))
        try:
            out = eval(src, env)  # noqa: S307 - restricted namespace, sanitized input
        except Exception as exc:  # noqa: BLE001
            raise ParseError(f"cannot parse {text!r}: {exc}") from None
        if not isinstance(out, Poly):
            raise ParseError(f"cannot parse {text!r}")
        return out

    def __repr__(self):
        return f"{self.field!r}[{','.join(self.gens)}]"


class Poly:
    """A polynomial: sparse map from exponent tuples to nonzero scalars."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: PolyRing, terms: dict, normalize: bool = True):
        self.ring = ring
        if normalize:
            f = ring.field
            clean = {}
            for e, c in terms.items():
                c = f.normalize(c)
                if c:
                    clean[e] = c
            terms = clean
        self.terms = terms
        self._hash = None

    # predicates / access
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self):
        """The scalar value of a constant polynomial (0 for the zero poly)."""
        if not self.is_constant():
            raise PreconditionError(f"{self} is not constant")
        for c in self.terms.values():
            return c
        return 0

    def coefficient(self, exps) -> object:
        return self.terms.get(tuple(exps), 0)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def sorted_terms(self) -> list:
        """Terms in descending graded-lex order."""
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=True)

    def _check(self, other: "Poly"):
        if self.ring != other.ring:
            raise UniverseMismatch(f"polynomials over {self.ring} and {other.ring}")

    def _lift(self, other):
        if isinstance(other, Poly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.ring.const(other)
        return None

    # arithmetic
    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return Poly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        if not other.terms:
            return self
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) - c
        return Poly(self.ring, out)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Poly):
            self._check(other)
            if not self.terms or not other.terms:
                return self.ring.zero()
            out: dict = {}
            get = out.get
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    out[e] = get(e, 0) + c1 * c2
            return Poly(self.ring, out)
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def scale(self, c) -> "Poly":
        c = self.ring.field.normalize(c)
        if not c:
            return self.ring.zero()
        if c == 1:
            return self
        return Poly(self.ring, {e: v * c for e, v in self.terms.items()})

    def __truediv__(self, other):
        if isinstance(other, Poly):
            other = other.constant_value()
        if not other:
            raise ZeroDivisionError("division by zero")
        return self.scale(self.ring.field.inv(self.ring.field.normalize(other)))

    def __pow__(self, n):
        if isinstance(n, Poly):
            n = n.constant_value()
        n = int(n)
        if n < 0:
            raise PreconditionError("negative power")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def shift(self, exps) -> "Poly":
        """Multiply by the monomial x^exps."""
        return Poly(self.ring, {add_exps(e, exps): c for e, c in self.terms.items()}, normalize=False)

    def partial(self, i: int) -> "Poly":
        """The formal partial derivative with respect to generator i."""
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                out[e[:i] + (k - 1,) + e[i + 1:]] = c * k
        return Poly(self.ring, out)

    # comparison
    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ring == other.ring and self.terms == other.terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self == self.ring.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        return format_poly(self)


def _fmt_monomial(gens, e) -> str:
    parts = []
    for g, k in zip(gens, e):
        if k == 1:
            parts.append(g)
        elif k:
            parts.append(f"{g}^{k}")
    return "*".join(parts)


def format_poly(p: Poly) -> str:
    if not p.terms:
        return "0"
    out = []
    for e, c in p.sorted_terms():
        mono = _fmt_monomial(p.ring.gens, e)
        neg = not p.ring.field.p and c < 0
        mag = -c if neg else c
        if mono:
            body = mono if mag == 1 else f"{mag}*{mono}"
        else:
            body = str(mag)
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


def poly_add(a: Poly, b: Poly) -> Poly:
    return a + b


def poly_sub(a: Poly, b: Poly) -> Poly:
    return a - b


def poly_mul(a: Poly, b: Poly) -> Poly:
    return a * b


class Derivation:
    """A k-derivation of A, given by its values on the generators."""

    __slots__ = ("ring", "images")

    def __init__(self, ring: PolyRing, images: Iterable[Poly]):
        images = tuple(images)
        if len(images) != ring.ngens:
            raise ValidationError(f"derivation needs {ring.ngens} images, got {len(images)}")
        for im in images:
            if im.ring != ring:
                raise UniverseMismatch("derivation image over a different ring")
        self.ring = ring
        self.images = images

    @classmethod
    def partial(cls, ring: PolyRing, i: int) -> "Derivation":
        return cls(ring, [ring.one() if j == i else ring.zero() for j in range(ring.ngens)])

    def __call__(self, a: Poly) -> Poly:
        return derivation_apply(self, a)

    def __add__(self, other: "Derivation") -> "Derivation":
        return Derivation(self.ring, [a + b for a, b in zip(self.images, other.images)])

    def __rmul__(self, c) -> "Derivation":
        return Derivation(self.ring, [c * a for a in self.images])

    def __eq__(self, other):
        return isinstance(other, Derivation) and self.ring == other.ring and self.images == other.images

    def __hash__(self):
        return hash((self.ring, self.images))

    def __repr__(self):
        return "Derivation(" + ", ".join(f"{g}->{im}" for g, im in zip(self.ring.gens, self.images)) + ")"


def derivation_apply(d: Derivation, a: Poly) -> Poly:
    if a.ring != d.ring:
        raise UniverseMismatch("derivation and polynomial over different rings")
    out = a.ring.zero()
    for i, im in enumerate(d.images):
        if im:
            out = out + a.partial(i) * im
    return out


def determinant(matrix: Sequence[Sequence[Poly]], ring: PolyRing) -> Poly:
    """Determinant by cofactor expansion with memoized minors."""
    n = len(matrix)

    @lru_cache(maxsize=None)
    def minor(rows: tuple, cols: tuple) -> Poly:
        if not rows:
            return ring.one()
        r = rows[0]
        total = ring.zero()
        for j, c in enumerate(cols):
            entry = matrix[r][c]
            if entry:
                sub = minor(rows[1:], cols[:j] + cols[j + 1:])
                term = entry * sub
                total = total - term if j % 2 else total + term
        return total

    return minor(tuple(range(n)), tuple(range(n)))


def solve_in_derivation_basis(delta: Derivation, basis: Sequence[Derivation]) -> list[Poly]:
    """Coordinates c with delta = sum_j c_j * basis_j.

    Only square generator matrices whose determinant is a nonzero scalar are
    supported; anything else needs a caller-supplied solver.
    """
    ring = delta.ring
    n = ring.ngens
    if len(basis) != n:
        raise UnsupportedGeneratingSet(
            f"{len(basis)} derivations for {n} generators: not a square system, supply a solver"
        )
    for b in basis:
        if b.ring != ring:
            raise UniverseMismatch("basis derivation over a different ring")
    if n == 0:
        return []
    m = [[basis[j].images[i] for j in range(n)] for i in range(n)]
    det = determinant(m, ring)
    if det.is_zero() or not det.is_constant():
        raise UnsupportedGeneratingSet(f"generator matrix determinant {det} is not a nonzero scalar")
    inv_det = ring.field.inv(det.constant_value())
    coords = []
    for j in range(n):
        acc = ring.zero()
        for i in range(n):
            rows = [r for r in range(n) if r != i]
            cols = [c for c in range(n) if c != j]
            cof = determinant([[m[r][c] for c in cols] for r in rows], ring)
            if (i + j) % 2:
                cof = -cof
            acc = acc + cof * delta.images[i]
        coords.append(acc.scale(inv_det))
    return coords

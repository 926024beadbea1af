"""Hasse-Schmidt derivations of k[x1..xn], stored through Phi_D.

An HS-derivation D over (s, Delta) is the k-algebra map
Phi_D: A -> A[[s]]_Delta, a -> sum_alpha D_alpha(a) s^alpha, with constant
term the identity.  Since A is a polynomial ring, Phi_D is determined by the
images of the generators, and so is every component D_alpha.
"""

from __future__ import annotations

import math
import threading
from itertools import combinations_with_replacement
from typing import Callable, Iterable

from .algebra import Poly, PolyRing
from .errors import PreconditionError, UniverseMismatch, ValidationError
from .multiindex import CoIdeal, Exps, MultiIndex, as_exps
from .series import Series, truncate
from .substitution import SubstMap, apply, codiagonal, inclusion


class HSDeriv:
    __slots__ = ("ring", "vars", "trunc", "images", "_mono", "_lock")

    def __init__(self, ring: PolyRing, trunc: CoIdeal, images, check: bool = True):
        self.ring = ring
        self.vars = trunc.vars
        self.trunc = trunc
        if isinstance(images, dict):
            unknown = set(images) - set(ring.gens)
            if unknown:
                raise ValidationError(f"images for unknown generators {sorted(unknown)}")
            images = [
                images.get(g, Series.constant(ring, trunc.vars, trunc, ring.gen(g))) for g in ring.gens
            ]
        images = tuple(images)
        if len(images) != ring.ngens:
            raise ValidationError("one image per ring generator is required")
        if check:
            for g, x, img in zip(ring.gens, ring.generators(), images):
                if img.ring != ring or img.vars != self.vars or img.trunc != trunc:
                    raise UniverseMismatch(f"image of {g} is not a series over ({self.vars}, {trunc})")
                if img.constant_term() != x:
                    raise ValidationError(f"image of {g} must have constant term {g}")
        self.images = images
        self._mono = {}
        self._lock = threading.Lock()

    @classmethod
    def identity(cls, ring: PolyRing, trunc: CoIdeal) -> "HSDeriv":
        return cls(ring, trunc, [Series.constant(ring, trunc.vars, trunc, x) for x in ring.generators()], check=False)

    @classmethod
    def parse(cls, ring: PolyRing, trunc: CoIdeal, images: dict) -> "HSDeriv":
        """Images given as expressions, e.g. ``{"x": "x + s + x*s^2"}``."""
        return cls(ring, trunc, {g: Series.parse(ring, trunc.vars, trunc, t) for g, t in images.items()})

    def universe(self):
        return (self.ring, self.trunc)

    def _check(self, other: "HSDeriv"):
        if self.ring != other.ring or self.trunc != other.trunc:
            raise UniverseMismatch(f"HS-derivations over ({self.ring}, {self.trunc}) and ({other.ring}, {other.trunc})")

    def monomial_image(self, k: Exps) -> Series:
        """Phi_D(x^k), memoized."""
        got = self._mono.get(k)
        if got is not None:
            return got
        if not any(k):
            val = Series.one(self.ring, self.vars, self.trunc)
        else:
            i = next(j for j, x in enumerate(k) if x)
            prev = k[:i] + (k[i] - 1,) + k[i + 1:]
            val = self.monomial_image(prev) * self.images[i]
        with self._lock:
            self._mono.setdefault(k, val)
        return val

    def is_identity(self) -> bool:
        return all(len(img.coeffs) <= 1 for img in self.images)

    def __eq__(self, other):
        if isinstance(other, HSDeriv):
            return self.ring == other.ring and self.trunc == other.trunc and self.images == other.images
        return NotImplemented

    def __hash__(self):
        return hash((self.trunc, self.images))

    def __repr__(self):
        body = ", ".join(f"{g} -> {img!r}" for g, img in zip(self.ring.gens, self.images))
        return f"HSDeriv({self.trunc}: {body})"


def identity(ring: PolyRing, trunc: CoIdeal) -> HSDeriv:
    return HSDeriv.identity(ring, trunc)


def phi_apply(D: HSDeriv, a: Poly) -> Series:
    """Phi_D(a) = sum_alpha D_alpha(a) s^alpha."""
    if a.ring != D.ring:
        raise UniverseMismatch("polynomial over a different ring")
    out = {}
    for k, c in a.terms.items():
        for alpha, p in D.monomial_image(k).coeffs.items():
            t = p.scale(c)
            prev = out.get(alpha)
            out[alpha] = t if prev is None else prev + t
    return Series(D.ring, D.vars, D.trunc, out, check=False)


def component(D: HSDeriv, alpha, a: Poly) -> Poly:
    """D_alpha(a)."""
    al = alpha if isinstance(alpha, tuple) else as_exps(D.vars, alpha)
    if al not in D.trunc.members:
        raise PreconditionError(f"{MultiIndex(D.vars, al)} is outside {D.trunc}")
    return phi_apply(D, a).coeff(al)


class OperatorHandle:
    """The component D_alpha as a callable k-linear operator on A."""

    __slots__ = ("source", "index")

    def __init__(self, source: HSDeriv, index):
        al = index if isinstance(index, tuple) else as_exps(source.vars, index)
        if al not in source.trunc.members:
            raise PreconditionError(f"{MultiIndex(source.vars, al)} is outside {source.trunc}")
        self.source = source
        self.index = al

    @property
    def ring(self) -> PolyRing:
        return self.source.ring

    def __call__(self, a: Poly) -> Poly:
        return phi_apply(self.source, a).coeff(self.index)

    def __repr__(self):
        return f"D_{MultiIndex(self.source.vars, self.index)!r}"


def tilde_apply(D: HSDeriv, f: Series) -> Series:
    """D~(sum a_alpha s^alpha) = sum Phi_D(a_alpha) s^alpha."""
    if f.ring != D.ring or f.vars != D.vars or f.trunc != D.trunc:
        raise UniverseMismatch("series outside the universe of the HS-derivation")
    members = D.trunc.members
    out = {}
    for alpha, c in f.coeffs.items():
        for beta, p in phi_apply(D, c).coeffs.items():
            k = tuple(x + y for x, y in zip(alpha, beta))
            if k in members:
                prev = out.get(k)
                out[k] = p if prev is None else prev + p
    return Series(D.ring, D.vars, D.trunc, out, check=False)


def compose(D: HSDeriv, E: HSDeriv) -> HSDeriv:
    """D o E, through Phi_{D o E} = D~ o Phi_E."""
    D._check(E)
    return HSDeriv(D.ring, D.trunc, [tilde_apply(D, img) for img in E.images], check=False)


def compose_all(items: Iterable[HSDeriv]) -> HSDeriv:
    items = list(items)
    if not items:
        raise PreconditionError("empty composition")
    out = items[0]
    for nxt in items[1:]:
        out = compose(out, nxt)
    return out


def invert(D: HSDeriv) -> HSDeriv:
    """D*, solving D~(Phi_{D*}(x_i)) = x_i degree by degree."""
    ring = D.ring
    order = D.trunc.sorted()
    zero = D.vars.zero()
    images = []
    for x in ring.generators():
        y = {zero: x}
        phis = {zero: phi_apply(D, x)}
        for alpha in order[1:]:
            acc = ring.zero()
            for gamma, ph in phis.items():
                if gamma != alpha and all(g <= a for g, a in zip(gamma, alpha)):
                    diff = tuple(a - g for a, g in zip(alpha, gamma))
                    c = ph.coeffs.get(diff)
                    if c is not None:
                        acc = acc + c
            if acc:
                y[alpha] = -acc
                phis[alpha] = phi_apply(D, -acc)
        images.append(Series(ring, D.vars, D.trunc, y, check=False))
    return HSDeriv(ring, D.trunc, images, check=False)


def ell(D: HSDeriv):
    """ord(D - Id); ``math.inf`` for the identity."""
    best = math.inf
    for x, img in zip(D.ring.generators(), D.images):
        best = min(best, (img - x).order())
    return best


def commutator(D: HSDeriv, E: HSDeriv) -> HSDeriv:
    """[D, E] = D o E o D* o E*."""
    D._check(E)
    return compose_all([D, E, invert(D), invert(E)])


def external(D: HSDeriv, E: HSDeriv) -> HSDeriv:
    """D [x] E over the disjoint union of the variable sets, with components D_alpha o E_beta."""
    if D.ring != E.ring:
        raise UniverseMismatch("external product over different rings")
    trunc = CoIdeal.product(D.trunc, E.trunc)
    n = len(D.vars)
    images = []
    for img in E.images:
        out = {}
        for beta, c in img.coeffs.items():
            for alpha, p in phi_apply(D, c).coeffs.items():
                out[alpha + beta] = p
        images.append(Series(D.ring, trunc.vars, trunc, out, check=False))
    return HSDeriv(D.ring, trunc, images, check=False)


def act(phi: SubstMap, D: HSDeriv) -> HSDeriv:
    """phi . D, with Phi_{phi . D} = phi o Phi_D."""
    if phi.ring != D.ring or phi.src_trunc != D.trunc:
        raise UniverseMismatch(f"map from {phi.src_trunc} cannot act on an HS-derivation over {D.trunc}")
    return HSDeriv(D.ring, phi.dst_trunc, [apply(phi, img) for img in D.images], check=False)


def phi_upper_D(phi: SubstMap, D: HSDeriv) -> SubstMap:
    """The map phi^D with (phi . D)~ o phi^D = phi o D~, i.e. phi^D(s) = E*~(phi(s)), E = phi . D."""
    E = act(phi, D)
    Einv = invert(E)
    return SubstMap(phi.ring, phi.src_trunc, phi.dst_trunc, [tilde_apply(Einv, img) for img in phi.images], check=False)


def d_of_phi(D: HSDeriv, phi: SubstMap) -> SubstMap:
    """D(phi): s -> D~(phi(s))."""
    if phi.ring != D.ring or phi.dst_trunc != D.trunc:
        raise UniverseMismatch(f"HS-derivation over {D.trunc} does not match the target {phi.dst_trunc}")
    return SubstMap(phi.ring, phi.src_trunc, phi.dst_trunc, [tilde_apply(D, img) for img in phi.images], check=False)


def iterativity_sides(D: HSDeriv, suffix: str = "'"):
    """((i + i') . D, (i . D) o (i' . D)) over s and a primed copy of s."""
    ring = D.ring
    n = len(D.vars)
    plus = codiagonal(ring, D.trunc, suffix)
    big = plus.dst_trunc
    left = act(inclusion(ring, D.trunc, big, list(range(n))), D)
    right = act(inclusion(ring, D.trunc, big, list(range(n, 2 * n))), D)
    return act(plus, D), compose(left, right)


def is_iterative(D: HSDeriv) -> bool:
    a, b = iterativity_sides(D)
    return a == b


def truncate_hs(D: HSDeriv, trunc) -> HSDeriv:
    """tau(D) to a smaller co-ideal (or to the norm-<=n slice for an int)."""
    if isinstance(trunc, int):
        trunc = D.trunc.slice(trunc)
    if not trunc.is_subset(D.trunc):
        raise PreconditionError(f"{trunc} is not contained in {D.trunc}")
    return HSDeriv(D.ring, trunc, [truncate(img, trunc) for img in D.images], check=False)


# -- differential operator order ---------------------------------------------


def default_witnesses(ring: PolyRing, degree: int) -> list[Poly]:
    return ring.monomials_up_to(degree)


def bracket(P: Callable[[Poly], Poly], a: Poly) -> Callable[[Poly], Poly]:
    """[P, a]: w -> P(a w) - a P(w)."""
    return lambda w: P(a * w) - a * P(w)


def op_order_at_most(h, n: int, witnesses: Iterable[Poly] | None = None, multipliers: Iterable[Poly] | None = None) -> bool:
    """Witness check that every (n+1)-fold bracket of h with multipliers vanishes.

    ``h`` is an OperatorHandle or any callable on polynomials (then
    ``witnesses`` must be given, or h must expose ``ring``).  Multipliers
    default to the ring generators, which suffices for polynomial rings
    since brackets with products expand into brackets with factors.
    This is a sampling check: True means no witness refuted the bound.
    """
    if n < 0:
        return False
    ring = getattr(h, "ring", None)
    if witnesses is None:
        if ring is None:
            raise PreconditionError("witnesses are required for a bare callable")
        m = h.source.trunc.max_norm if isinstance(h, OperatorHandle) else 0
        witnesses = default_witnesses(ring, m + 2)
    witnesses = list(witnesses)
    if not witnesses:
        raise PreconditionError("witness set must be non-empty")
    if multipliers is None:
        multipliers = (ring or witnesses[0].ring).generators()
    multipliers = list(multipliers)
    for combo in combinations_with_replacement(multipliers, n + 1):
        op = h
        for a in combo:
            op = bracket(op, a)
        for w in witnesses:
            if op(w):
                return False
    return True


def operator_difference(P, Q, scale=1):
    """w -> P(w) - scale * Q(w), keeping the ring for order checks."""

    class _Op:
        def __init__(self):
            self.ring = P.ring

        def __call__(self, w):
            return P(w) - Q(w).scale(scale)

    return _Op()

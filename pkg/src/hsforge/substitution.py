"""Substitution maps A[[s]]_nabla -> A[[t]]_Delta and their coefficient families."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from .algebra import Poly, PolyRing
from .errors import PreconditionError, UniverseMismatch, ValidationError
from .multiindex import (
    CoIdeal,
    Exps,
    MultiIndex,
    VarSet,
    as_exps,
    grlex_key,
    leq_exps,
    minimal_outside_exps,
    ordered_partitions_exps,
    slots,
    split_pairs,
    sub_exps,
)
from .series import Series, truncate


class SubstMap:
    """phi given by the images phi(s) of the source variables.

    ``images`` is a tuple of Series over (dst_vars, dst_trunc) aligned with
    ``src_vars``.  Instances are immutable; monomial images and coefficients
    are memoized behind a lock so shared maps can be used from several threads.
    """

    __slots__ = ("ring", "src_vars", "src_trunc", "dst_vars", "dst_trunc", "images", "_mono", "_coeff", "_lock")

    def __init__(self, ring: PolyRing, src_trunc: CoIdeal, dst_trunc: CoIdeal, images, check: bool = True):
        self.ring = ring
        self.src_vars = src_trunc.vars
        self.src_trunc = src_trunc
        self.dst_vars = dst_trunc.vars
        self.dst_trunc = dst_trunc
        if isinstance(images, dict):
            extra = set(images) - set(self.src_vars.names)
            if extra:
                raise ValidationError(f"images given for unknown variables {sorted(extra)}")
            zero = Series.zero(ring, self.dst_vars, dst_trunc)
            images = [images.get(n, zero) for n in self.src_vars.names]
        images = tuple(images)
        if len(images) != len(self.src_vars):
            raise ValidationError("one image per source variable is required")
        for name, img in zip(self.src_vars.names, images):
            if img.ring != ring or img.vars != self.dst_vars or img.trunc != dst_trunc:
                raise UniverseMismatch(f"image of {name} is not a series over ({self.dst_vars}, {dst_trunc})")
            if img.constant_term():
                raise ValidationError(f"image of {name} has nonzero constant term {img.constant_term()}")
        self.images = images
        self._mono = {self.src_vars.zero(): Series.one(ring, self.dst_vars, dst_trunc)}
        self._coeff = {}
        self._lock = threading.Lock()
        if check and not validate(self):
            raise ValidationError("the images do not annihilate the source truncation")

    def image(self, name: str) -> Series:
        return self.images[self.src_vars.index(name)]

    def image_map(self) -> dict:
        return dict(zip(self.src_vars.names, self.images))

    def same_universe(self, other: "SubstMap") -> bool:
        return (
            self.ring == other.ring
            and self.src_trunc == other.src_trunc
            and self.dst_trunc == other.dst_trunc
        )

    def monomial_image(self, alpha: Exps) -> Series:
        """phi(s^alpha), memoized."""
        got = self._mono.get(alpha)
        if got is not None:
            return got
        i = next(k for k, x in enumerate(alpha) if x)
        prev = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1:]
        val = self.monomial_image(prev) * self.images[i]
        with self._lock:
            self._mono.setdefault(alpha, val)
        return val

    def __call__(self, a: Series) -> Series:
        return apply(self, a)

    def __eq__(self, other):
        if isinstance(other, SubstMap):
            return self.same_universe(other) and self.images == other.images
        return NotImplemented

    def __hash__(self):
        return hash((self.src_trunc, self.dst_trunc, self.images))

    def __repr__(self):
        body = ", ".join(f"{n} -> {img!r}" for n, img in zip(self.src_vars.names, self.images))
        return f"SubstMap({self.src_trunc} -> {self.dst_trunc}: {body})"


def make_subst(images, src: CoIdeal, dst: CoIdeal, ring: PolyRing | None = None) -> SubstMap:
    """Build and validate a substitution map.

    ``images`` maps variable names to Series (or, given ``ring``, to strings
    parsed as series in the target variables).
    """
    if ring is None:
        first = next(iter(images.values()), None) if isinstance(images, dict) else (images[0] if images else None)
        if not isinstance(first, Series):
            raise PreconditionError("a ring is needed when no image is a Series")
        ring = first.ring
    if isinstance(images, dict):
        images = {
            k: (Series.parse(ring, dst.vars, dst, v) if isinstance(v, str) else v) for k, v in images.items()
        }
    return SubstMap(ring, src, dst, images)


def validate(phi: SubstMap) -> bool:
    """True iff phi kills every s^alpha with alpha outside the source truncation.

    Only the minimal indices outside with norm at most max|Delta| need a
    check: the image of s^alpha has order >= |alpha|.
    """
    for alpha in minimal_outside_exps(phi.src_trunc, phi.dst_trunc.max_norm):
        if not phi.monomial_image(alpha).is_zero():
            return False
    return True


def zero_map(ring: PolyRing, src: CoIdeal, dst: CoIdeal) -> SubstMap:
    zero = Series.zero(ring, dst.vars, dst)
    return SubstMap(ring, src, dst, [zero] * len(src.vars), check=False)


def is_trivial(phi: SubstMap) -> bool:
    return all(img.is_zero() for img in phi.images)


def identity_map(ring: PolyRing, trunc: CoIdeal) -> SubstMap:
    return SubstMap(ring, trunc, trunc, [Series.monomial(ring, trunc.vars, trunc, u) for u in trunc.vars.units()], check=False)


def combinatorial(ring: PolyRing, src: CoIdeal, dst: CoIdeal, mapping: dict | None = None) -> SubstMap:
    """s -> t for a map of variable names (positional when ``mapping`` is None)."""
    if mapping is None:
        if len(src.vars) != len(dst.vars):
            raise PreconditionError("positional combinatorial maps need equally many variables")
        mapping = dict(zip(src.vars.names, dst.vars.names))
    images = {s: Series.variable(ring, dst.vars, dst, t) for s, t in mapping.items()}
    return SubstMap(ring, src, dst, images)


def coeff(phi: SubstMap, alpha, e) -> Poly:
    """C_e(phi, alpha): sum over Par(e, alpha) of products of image coefficients."""
    a = alpha if isinstance(alpha, tuple) else as_exps(phi.src_vars, alpha)
    ee = e if isinstance(e, tuple) else as_exps(phi.dst_vars, e)
    if sum(a) > sum(ee):
        raise PreconditionError(f"|alpha| = {sum(a)} exceeds |e| = {sum(ee)}")
    if a not in phi.src_trunc.members:
        raise PreconditionError(f"{MultiIndex(phi.src_vars, a)} is outside the source truncation")
    if ee not in phi.dst_trunc.members:
        raise PreconditionError(f"{MultiIndex(phi.dst_vars, ee)} is outside the target truncation")
    return _coeff(phi, a, ee)


def _coeff(phi: SubstMap, a: Exps, e: Exps) -> Poly:
    key = (a, e)
    got = phi._coeff.get(key)
    if got is not None:
        return got
    ring = phi.ring
    sl = slots(a)
    if sum(a) > sum(e):
        val = ring.zero()
    else:
        coeffs = [img.coeffs for img in phi.images]
        total = ring.zero()
        for parts in ordered_partitions_exps(e, len(sl)):
            prod = ring.one()
            for (t, _), p in zip(sl, parts):
                c = coeffs[t].get(p)
                if c is None:
                    prod = None
                    break
                prod = prod * c
            if prod is not None:
                total = total + prod
        val = total
    with phi._lock:
        phi._coeff.setdefault(key, val)
    return val


def apply(phi: SubstMap, a: Series) -> Series:
    """phi(a) = sum_alpha a_alpha phi(s^alpha)."""
    if a.ring != phi.ring or a.vars != phi.src_vars or a.trunc != phi.src_trunc:
        raise UniverseMismatch(f"series over ({a.vars}, {a.trunc}) given to a map from ({phi.src_vars}, {phi.src_trunc})")
    out = {}
    for alpha, ca in a.coeffs.items():
        for e, c in phi.monomial_image(alpha).coeffs.items():
            t = ca * c
            prev = out.get(e)
            out[e] = t if prev is None else prev + t
    return Series(phi.ring, phi.dst_vars, phi.dst_trunc, out, check=False)


def apply_via_coeffs(phi: SubstMap, a: Series) -> Series:
    """Same as ``apply`` but through the coefficient family C_e(phi, alpha)."""
    if a.vars != phi.src_vars or a.trunc != phi.src_trunc:
        raise UniverseMismatch("series outside the source universe")
    out = {}
    for e in phi.dst_trunc.sorted():
        acc = phi.ring.zero()
        for alpha, ca in a.coeffs.items():
            if sum(alpha) <= sum(e):
                acc = acc + ca * _coeff(phi, alpha, e)
        if acc:
            out[e] = acc
    return Series(phi.ring, phi.dst_vars, phi.dst_trunc, out, check=False)


def compose(psi: SubstMap, phi: SubstMap) -> SubstMap:
    """psi after phi."""
    if phi.ring != psi.ring or phi.dst_trunc != psi.src_trunc:
        raise UniverseMismatch(f"cannot compose: {phi.dst_trunc} vs {psi.src_trunc}")
    return SubstMap(phi.ring, phi.src_trunc, psi.dst_trunc, [apply(psi, img) for img in phi.images], check=False)


def add(phi: SubstMap, phi2: SubstMap) -> SubstMap:
    """Imagewise sum; re-validated since sums need not kill the source truncation."""
    if not phi.same_universe(phi2):
        raise UniverseMismatch("substitution maps over different universes")
    return SubstMap(phi.ring, phi.src_trunc, phi.dst_trunc, [a + b for a, b in zip(phi.images, phi2.images)])


def tensor(phi: SubstMap, psi: SubstMap) -> SubstMap:
    if phi.ring != psi.ring:
        raise UniverseMismatch("tensor product over different rings")
    src = CoIdeal.product(phi.src_trunc, psi.src_trunc)
    dst = CoIdeal.product(phi.dst_trunc, psi.dst_trunc)
    n = len(phi.dst_vars)
    left = list(range(n))
    right = list(range(n, n + len(psi.dst_vars)))
    images = [img.embed(dst.vars, dst, left) for img in phi.images]
    images += [img.embed(dst.vars, dst, right) for img in psi.images]
    return SubstMap(phi.ring, src, dst, images, check=False)


def scaled_coideal(nabla: CoIdeal, nu: Exps) -> CoIdeal:
    """nu.nabla = {gamma | gamma <= nu*alpha for some alpha in nabla}."""
    from .multiindex import below_exps

    members = set()
    for alpha in nabla.members:
        top = tuple(k * a for k, a in zip(nu, alpha))
        if top not in members:
            members.update(below_exps(top))
    return CoIdeal(nabla.vars, members, check=False)


def power_map(ring: PolyRing, nu, nabla: CoIdeal) -> SubstMap:
    """[nu]: s -> s^{nu_s}, from nabla to nu.nabla over the same variables."""
    vars = nabla.vars
    if isinstance(nu, dict):
        nu = tuple(nu.get(n, 1) for n in vars.names)
    nu = tuple(nu)
    if len(nu) != len(vars) or any(k < 1 for k in nu):
        raise PreconditionError("power maps need one positive exponent per variable")
    dst = scaled_coideal(nabla, nu)
    images = []
    for i, k in enumerate(nu):
        e = [0] * len(vars)
        e[i] = k
        images.append(Series.monomial(ring, vars, dst, tuple(e)))
    return SubstMap(ring, nabla, dst, images, check=False)


def sum_coideal(nabla: CoIdeal, primed: VarSet) -> CoIdeal:
    """{(beta, gamma) | beta + gamma in nabla} over s and a primed copy."""
    members = []
    for a in nabla.members:
        for b, g in split_pairs(a):
            members.append(b + g)
    return CoIdeal(nabla.vars.disjoint_union(primed), members, check=False)


def codiagonal(ring: PolyRing, nabla: CoIdeal, suffix: str = "'") -> SubstMap:
    """s -> s + s' from nabla to the sum co-ideal over s and s'."""
    primed = nabla.vars.primed(suffix)
    dst = sum_coideal(nabla, primed)
    n = len(nabla.vars)
    images = []
    for i in range(n):
        u = [0] * (2 * n)
        u[i] = 1
        v = [0] * (2 * n)
        v[n + i] = 1
        images.append(Series(ring, dst.vars, dst, {tuple(u): ring.one(), tuple(v): ring.one()}, check=False))
    return SubstMap(ring, nabla, dst, images, check=False)


def inclusion(ring: PolyRing, src: CoIdeal, dst: CoIdeal, positions) -> SubstMap:
    """s_i -> the variable at ``positions[i]`` of the larger variable set."""
    images = [Series.monomial(ring, dst.vars, dst, dst.vars.units()[p]) for p in positions]
    return SubstMap(ring, src, dst, images)


def has_constant_coeffs(phi: SubstMap) -> bool:
    return all(c.is_constant() for img in phi.images for c in img.coeffs.values())


def truncate_subst(phi: SubstMap, n: int) -> SubstMap:
    """tau_n(phi) between the norm-<=n slices."""
    if n < 0:
        raise PreconditionError("truncation length must be >= 0")
    src = phi.src_trunc.slice(n)
    dst = phi.dst_trunc.slice(n)
    return SubstMap(phi.ring, src, dst, [truncate(img, dst) for img in phi.images], check=False)


def extend_subst(phi: SubstMap, src: CoIdeal, dst: CoIdeal, check: bool = True) -> SubstMap:
    """Same images viewed between larger truncations (zero-extension)."""
    if not phi.src_trunc.is_subset(src) or not phi.dst_trunc.is_subset(dst):
        raise PreconditionError("extension must go to larger truncations over the same variables")
    images = [Series(phi.ring, dst.vars, dst, img.coeffs, check=False) for img in phi.images]
    return SubstMap(phi.ring, src, dst, images, check=check)


def split_top(phi: SubstMap, m: int):
    """phi = phi_m + phi_{<m}: images split into their norm-m and lower parts."""
    top, low = [], []
    for img in phi.images:
        top.append(Series(phi.ring, phi.dst_vars, phi.dst_trunc, {a: c for a, c in img.coeffs.items() if sum(a) == m}, check=False))
        low.append(Series(phi.ring, phi.dst_vars, phi.dst_trunc, {a: c for a, c in img.coeffs.items() if sum(a) < m}, check=False))
    mk = lambda imgs: SubstMap(phi.ring, phi.src_trunc, phi.dst_trunc, imgs, check=False)
    return mk(top), mk(low)


# -- coefficient tables -------------------------------------------------------


@dataclass
class CoeffTable:
    """A finite table K[(e, alpha)] of ring elements, absent entries meaning 0."""

    ring: PolyRing
    src_trunc: CoIdeal
    dst_trunc: CoIdeal
    entries: dict = field(default_factory=dict)

    def get(self, e: Exps, alpha: Exps) -> Poly:
        c = self.entries.get((e, alpha))
        return c if c is not None else self.ring.zero()

    def copy(self) -> "CoeffTable":
        return CoeffTable(self.ring, self.src_trunc, self.dst_trunc, dict(self.entries))


def table_from_subst(phi: SubstMap) -> CoeffTable:
    entries = {}
    for e in phi.dst_trunc.sorted():
        for alpha in phi.src_trunc.sorted():
            if sum(alpha) > sum(e):
                break
            c = _coeff(phi, alpha, e)
            if c:
                entries[(e, alpha)] = c
    return CoeffTable(phi.ring, phi.src_trunc, phi.dst_trunc, entries)


def check_multiplicativity_table(K: CoeffTable) -> bool:
    """K_{e,mu+nu} = sum over beta+gamma=e, |mu|<=|beta|, |nu|<=|gamma| of K_{beta,mu} K_{gamma,nu}.

    Checked for all mu, nu in the source truncation and e in the target with
    |mu+nu| <= |e|, together with K_{0,0} = 1 and the vanishing of entries
    with |alpha| > |e| or alpha outside the source truncation.
    """
    ring = K.ring
    src = K.src_trunc
    dst = K.dst_trunc
    z_s, z_t = src.vars.zero(), dst.vars.zero()
    if K.get(z_t, z_s) != ring.one():
        return False
    for (e, alpha), c in K.entries.items():
        if c and (alpha not in src.members or e not in dst.members or sum(alpha) > sum(e)):
            return False
    splits = {e: split_pairs(e) for e in dst.members}
    srt = src.sorted()
    for i, mu in enumerate(srt):
        for nu in srt[i:]:
            total = tuple(x + y for x, y in zip(mu, nu))
            nt = sum(total)
            nm, nn = sum(mu), sum(nu)
            for e in dst.members:
                if nt > sum(e):
                    continue
                rhs = ring.zero()
                for b, g in splits[e]:
                    if nm <= sum(b) and nn <= sum(g):
                        x = K.entries.get((b, mu))
                        y = K.entries.get((g, nu))
                        if x is not None and y is not None:
                            rhs = rhs + x * y
                if K.get(e, total) != rhs:
                    return False
    return True


def subst_from_table(K: CoeffTable, check: bool = True) -> SubstMap:
    """The map with phi(s_u) = sum_e K_{e, s_u} t^e."""
    dst = K.dst_trunc
    images = []
    for u in K.src_trunc.vars.units():
        coeffs = {e: K.entries[(e, u)] for e in dst.members if (e, u) in K.entries and any(e)}
        images.append(Series(K.ring, dst.vars, dst, coeffs, check=False))
    return SubstMap(K.ring, K.src_trunc, dst, images, check=check)


def apply_table(K: CoeffTable, a: Series) -> Series:
    """The A-linear map sum_e (sum_alpha K_{e,alpha} a_alpha) t^e."""
    out = {}
    for (e, alpha), c in K.entries.items():
        ca = a.coeffs.get(alpha)
        if ca is not None:
            t = c * ca
            prev = out.get(e)
            out[e] = t if prev is None else prev + t
    return Series(K.ring, K.dst_trunc.vars, K.dst_trunc, out, check=False)


def perturbable_entries(K: CoeffTable) -> list:
    """Entries (e, alpha) whose change must break multiplicativity.

    Entries K_{e, s_u} are free parameters, so perturbing one just yields a
    different map; the returned keys have |alpha| >= 2 with alpha in the
    source truncation, or alpha = 0 and e != 0.
    """
    keys = []
    for e in K.dst_trunc.sorted():
        for alpha in K.src_trunc.sorted():
            na = sum(alpha)
            if na > sum(e):
                break
            if na >= 2 or (na == 0 and any(e)):
                keys.append((e, alpha))
    return keys


def perturb_table(K: CoeffTable, key) -> CoeffTable:
    out = K.copy()
    out.entries[key] = K.get(*key) + 1
    if not out.entries[key]:
        del out.entries[key]
    return out

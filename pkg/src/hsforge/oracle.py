"""Brute-force counterparts of the closed formulas, random instances and the self-check suite."""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field
from typing import Callable

from .algebra import GF, QQ, Poly, PolyRing
from .errors import PreconditionError
from .generate import canonical_hs, generate_subst
from .hsderiv import (
    HSDeriv,
    OperatorHandle,
    act,
    component,
    compose,
    invert,
    phi_apply,
    phi_upper_D,
    tilde_apply,
)
from .multiindex import CoIdeal, Exps, VarSet, below_exps, split_pairs
from .series import Series, external_product, invert_partition, invert_recursive
from .substitution import (
    SubstMap,
    _coeff,
    apply,
    check_multiplicativity_table,
    coeff,
    compose as subst_compose,
    identity_map,
    inclusion,
    perturb_table,
    perturbable_entries,
    subst_from_table,
    apply_table,
    table_from_subst,
    tensor,
)


# -- oracles ------------------------------------------------------------------


def direct_C(phi: SubstMap, alpha: Exps, e: Exps) -> Poly:
    """Coefficient of t^e in prod_s phi(s)^{alpha_s}, by repeated series products."""
    prod = Series.one(phi.ring, phi.dst_vars, phi.dst_trunc)
    for img, k in zip(phi.images, alpha):
        for _ in range(k):
            prod = prod * img
    return prod.coeff(e)


def hs_inverse_partition(D: HSDeriv, alpha: Exps, a: Poly) -> Poly:
    """D*_alpha(a) as the signed sum over ordered partitions of composites D_{a1} o ... o D_{ad}."""
    from .multiindex import ordered_partitions_exps

    n = sum(alpha)
    if n == 0:
        return a
    total = D.ring.zero()
    for d in range(1, n + 1):
        for parts in ordered_partitions_exps(alpha, d):
            val = a
            for p in reversed(parts):
                val = component(D, p, val)
                if not val:
                    break
            total = total + val if d % 2 == 0 else total - val
    return total


def phiD_recursive_C(phi: SubstMap, D: HSDeriv, nu: Exps, e: Exps, memo: dict | None = None) -> Poly:
    """C_e(phi^D, nu) from C_e(phi, nu) minus the corrections sum C_beta(phi, g) D_g(C_gamma(phi^D, nu))."""
    if memo is None:
        memo = {}
    key = (nu, e)
    if key in memo:
        return memo[key]
    ring = phi.ring
    ne, nn = sum(e), sum(nu)
    if nn > ne:
        val = ring.zero()
    elif ne == 0:
        val = ring.one()
    else:
        val = _coeff(phi, nu, e)
        for beta, gamma in split_pairs(e):
            ng = sum(gamma)
            if not (nn <= ng < ne):
                continue
            inner = phiD_recursive_C(phi, D, nu, gamma, memo)
            if not inner:
                continue
            image = phi_apply(D, inner)
            nb = sum(beta)
            for g in phi.src_trunc.sorted():
                if sum(g) > nb:
                    break
                c = _coeff(phi, g, beta)
                if c:
                    dg = image.coeff(g)
                    if dg:
                        val = val - c * dg
    memo[key] = val
    return val


def _multinomial(n: int, parts) -> int:
    out = math.factorial(n)
    for k in parts:
        out //= math.factorial(k)
    return out


def _distributions(alpha: Exps, e: Exps):
    """Families e^t (t in supp alpha) with |e^t| = alpha_t adding up to e."""
    supp = [t for t, k in enumerate(alpha) if k]

    def rec(i, rest):
        if i == len(supp):
            if not any(rest):
                yield ()
            return
        k = alpha[supp[i]]
        for part in below_exps(rest):
            if sum(part) == k:
                remain = tuple(r - p for r, p in zip(rest, part))
                for tail in rec(i + 1, remain):
                    yield ((supp[i], part),) + tail

    return rec(0, e)


def top_degree_C(phi: SubstMap, alpha: Exps, e: Exps, literal: bool = False) -> Poly:
    """C_e(phi, alpha) for |alpha| = |e| from the linear parts of the images.

    Only the coefficients c^t_{u_v} of degree one contribute.  The correct
    formula carries the multinomial factor alpha_t! / prod_v e^t_v! per
    variable t; ``literal=True`` drops it, which is wrong in general.
    """
    if sum(alpha) != sum(e):
        raise PreconditionError("top-degree formula needs |alpha| = |e|")
    ring = phi.ring
    units = phi.dst_vars.units()
    total = ring.zero()
    for dist in _distributions(alpha, e):
        term = ring.one()
        for t, part in dist:
            if not literal:
                term = term.scale(_multinomial(alpha[t], part))
            for v, k in enumerate(part):
                if k:
                    term = term * (phi.images[t].coeff(units[v]) ** k)
        total = total + term
    return total


def composition_law_C(psi: SubstMap, phi: SubstMap, alpha: Exps, f: Exps) -> Poly:
    """sum_e C_e(phi, alpha) C_f(psi, e) over |alpha| <= |e| <= |f|."""
    total = psi.ring.zero()
    na, nf = sum(alpha), sum(f)
    for e in phi.dst_trunc.sorted():
        ne = sum(e)
        if ne > nf:
            break
        if ne < na:
            continue
        a = _coeff(phi, alpha, e)
        if a:
            total = total + a * _coeff(psi, e, f)
    return total


def dphi_factorization_sides(D: HSDeriv, phi: SubstMap, r: Series, literal: bool = False):
    """Both sides of D~ o phi = (D(phi) (x) rho) o (kappa . D)~ o iota evaluated at r.

    With ``literal=False`` the right factor rho sends each t to t (so the
    two copies of t merge); with ``literal=True`` it is the augmentation
    t -> 0, which does not make the identity hold.
    """
    from .hsderiv import d_of_phi

    ring = phi.ring
    nabla, delta = phi.src_trunc, phi.dst_trunc
    big = CoIdeal.product(nabla, delta)
    ns, nt = len(nabla.vars), len(delta.vars)
    iota = inclusion(ring, nabla, big, list(range(ns)))
    kappa = inclusion(ring, delta, big, list(range(ns, ns + nt)))
    kD = act(kappa, D)
    dphi = d_of_phi(D, phi)
    tail = [Series.zero(ring, delta.vars, delta) if literal else Series.monomial(ring, delta.vars, delta, u) for u in delta.vars.units()]
    merge = SubstMap(ring, big, delta, list(dphi.images) + tail, check=False)
    lhs = tilde_apply(D, apply(phi, r))
    rhs = apply(merge, tilde_apply(kD, apply(iota, r)))
    return lhs, rhs


# -- random instances -----------------------------------------------------------


def coefficient_pool(ring: PolyRing) -> list[Poly]:
    """Small coefficients {0, +-1, +-2, x, y, x+1} (generators as available)."""
    pool = [ring.const(c) for c in (0, 1, -1, 2, -2)]
    gens = ring.generators()
    pool += gens[:2]
    if gens:
        pool.append(gens[0] + 1)
    return pool


def random_coeff(rng: random.Random, ring: PolyRing) -> Poly:
    return rng.choice(coefficient_pool(ring))


def random_series(rng: random.Random, ring: PolyRing, trunc: CoIdeal, constant=None, density: float = 0.6) -> Series:
    coeffs = {}
    for a in trunc.sorted():
        if not any(a):
            if constant is not None:
                coeffs[a] = constant if isinstance(constant, Poly) else ring.const(constant)
            continue
        if rng.random() < density:
            c = random_coeff(rng, ring)
            if c:
                coeffs[a] = c
    return Series(ring, trunc.vars, trunc, coeffs, check=False)


def random_unit(rng: random.Random, ring: PolyRing, trunc: CoIdeal) -> Series:
    return random_series(rng, ring, trunc, constant=1)


def random_subst(rng: random.Random, ring: PolyRing, src: CoIdeal, dst: CoIdeal, density: float = 0.5, tries: int = 20) -> SubstMap:
    """Random valid map; always valid between full t_m truncations."""
    for _ in range(tries):
        images = [random_series(rng, ring, dst, density=density) for _ in src.vars]
        phi = SubstMap(ring, src, dst, images, check=False)
        from .substitution import validate

        if validate(phi):
            return phi
    from .substitution import zero_map

    return zero_map(ring, src, dst)


def random_hs(rng: random.Random, ring: PolyRing, trunc: CoIdeal, density: float = 0.5) -> HSDeriv:
    images = [random_series(rng, ring, trunc, constant=x, density=density) for x in ring.generators()]
    return HSDeriv(ring, trunc, images, check=False)


def random_hs_of_order(rng: random.Random, ring: PolyRing, trunc: CoIdeal, ell: int, density: float = 0.5) -> HSDeriv:
    """Random HS-derivation whose deviation from the identity starts at norm >= ell."""
    images = []
    for x in ring.generators():
        f = random_series(rng, ring, trunc, constant=x, density=density)
        coeffs = {a: c for a, c in f.coeffs.items() if not any(a) or sum(a) >= ell}
        images.append(Series(ring, trunc.vars, trunc, coeffs, check=False))
    return HSDeriv(ring, trunc, images, check=False)


def random_setting(rng: random.Random, max_gens: int = 2, max_vars: int = 2, max_m: int = 3, fields=(QQ, GF(5))):
    """(ring, vars, m) drawn from the small desk-scale ranges."""
    field_ = rng.choice(list(fields))
    ng = rng.randint(1, max_gens)
    ring = PolyRing(field_, ("x", "y")[:ng])
    nv = rng.randint(1, max_vars)
    m = rng.randint(1, max_m)
    return ring, nv, m


def var_set(prefix: str, n: int) -> VarSet:
    return VarSet(tuple(f"{prefix}{i}" for i in range(1, n + 1)) if n > 1 else (prefix,))


# -- self-check suite -------------------------------------------------------------


@dataclass
class CheckReport:
    name: str
    instances: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "instances": self.instances,
            "passed": self.passed,
            "failures": [{"input": d, "expected": x, "got": y} for d, x, y in self.failures],
        }


def _flip(obj):
    """Change one coefficient of a compared value (the perturbation mode)."""
    if isinstance(obj, bool):
        return not obj
    if isinstance(obj, (Poly, Series)):
        return obj + 1
    if isinstance(obj, HSDeriv):
        return HSDeriv(obj.ring, obj.trunc, [obj.images[0] + 1] + list(obj.images[1:]), check=False)
    raise TypeError(f"cannot perturb {type(obj).__name__}")


def _digest(*objs) -> str:
    return hashlib.sha256(repr(objs).encode()).hexdigest()[:12]


class _Recorder:
    def __init__(self, report: CheckReport, perturb: bool):
        self.report = report
        self.perturb = perturb

    def compare(self, inputs, expected, got):
        """Record one comparison; perturbation mode shifts the first expected value."""
        if self.perturb and self.report.instances == 0:
            expected = _flip(expected)
        self.report.instances += 1
        if expected != got:
            self.report.failures.append((_digest(*inputs), repr(expected), repr(got)))


def _check_unit_inverse(rng, rec):
    ring, nv, m = random_setting(rng, max_m=4)
    t = CoIdeal.tm(var_set("s", nv), m)
    r = random_unit(rng, ring, t)
    inv = invert_recursive(r)
    rec.compare((r,), inv, invert_partition(r))
    if (r * inv) != Series.one(ring, t.vars, t):
        rec.report.failures.append((_digest(r), "1", repr(r * inv)))


def _check_coeff_formula(rng, rec):
    ring, nv, m = random_setting(rng, max_m=4)
    src = CoIdeal.tm(var_set("s", rng.randint(1, 2)), m)
    dst = CoIdeal.tm(var_set("t", nv), m)
    phi = random_subst(rng, ring, src, dst)
    e = rng.choice(dst.sorted())
    choices = [a for a in src.sorted() if sum(a) <= sum(e)]
    alpha = rng.choice(choices)
    rec.compare((phi, alpha, e), direct_C(phi, alpha, e), coeff(phi, alpha, e))


def _check_composition_law(rng, rec):
    ring, _, m = random_setting(rng, max_m=3)
    a = CoIdeal.tm(var_set("s", rng.randint(1, 2)), m)
    b = CoIdeal.tm(var_set("t", rng.randint(1, 2)), m)
    c = CoIdeal.tm(var_set("u", rng.randint(1, 2)), m)
    phi = random_subst(rng, ring, a, b)
    psi = random_subst(rng, ring, b, c)
    comp = subst_compose(psi, phi)
    f = rng.choice(c.sorted())
    alpha = rng.choice([x for x in a.sorted() if sum(x) <= sum(f)])
    rec.compare((phi, psi, alpha, f), composition_law_C(psi, phi, alpha, f), coeff(comp, alpha, f))


def _check_multiplicativity(rng, rec):
    ring, nv, m = random_setting(rng, max_m=3)
    src = CoIdeal.tm(var_set("s", rng.randint(1, 2)), m)
    dst = CoIdeal.tm(var_set("t", nv), m)
    phi = random_subst(rng, ring, src, dst)
    K = table_from_subst(phi)
    rec.compare((phi, "forward"), True, check_multiplicativity_table(K))
    back = subst_from_table(K)
    a = random_series(rng, ring, src)
    rec.compare((phi, a), apply(back, a), apply_table(K, a))
    keys = perturbable_entries(K)
    if keys:
        bad = perturb_table(K, rng.choice(keys))
        rec.compare((phi, "control"), False, check_multiplicativity_table(bad))


def _check_apply_multiplicative(rng, rec):
    ring, nv, m = random_setting(rng, max_m=3)
    src = CoIdeal.tm(var_set("s", rng.randint(1, 2)), m)
    dst = CoIdeal.tm(var_set("t", nv), m)
    phi = random_subst(rng, ring, src, dst)
    a, b = random_series(rng, ring, src), random_series(rng, ring, src)
    rec.compare((phi, a, b), apply(phi, a) * apply(phi, b), apply(phi, a * b))
    c = random_coeff(rng, ring)
    rec.compare((phi, c, a), apply(phi, a) * c, apply(phi, a * c))


def _check_hs_inverse(rng, rec):
    ring, nv, m = random_setting(rng, max_m=3)
    t = CoIdeal.tm(var_set("s", nv), m)
    D = random_hs(rng, ring, t)
    alpha = rng.choice(t.sorted())
    a = rng.choice(ring.monomials_up_to(2))
    rec.compare((D, alpha, a), hs_inverse_partition(D, alpha, a), component(invert(D), alpha, a))


def _check_leibniz(rng, rec):
    ring, nv, m = random_setting(rng, max_m=3)
    t = CoIdeal.tm(var_set("s", nv), m)
    D = random_hs(rng, ring, t)
    a = random_coeff(rng, ring) * rng.choice(ring.monomials_up_to(2))
    b = rng.choice(ring.monomials_up_to(2)) + random_coeff(rng, ring)
    alpha = rng.choice(t.sorted())
    rhs = ring.zero()
    for beta, gamma in split_pairs(alpha):
        rhs = rhs + component(D, beta, a) * component(D, gamma, b)
    rec.compare((D, alpha, a, b), rhs, component(D, alpha, a * b))


def _check_phiD_recursion(rng, rec):
    ring, nv, m = random_setting(rng, max_m=3)
    src = CoIdeal.tm(var_set("s", rng.randint(1, 2)), m)
    dst = CoIdeal.tm(var_set("t", nv), m)
    phi = random_subst(rng, ring, src, dst)
    D = random_hs(rng, ring, src)
    pD = phi_upper_D(phi, D)
    e = rng.choice(dst.sorted())
    nu = rng.choice([a for a in src.sorted() if sum(a) <= sum(e)])
    rec.compare((phi, D, nu, e), phiD_recursive_C(phi, D, nu, e), coeff(pD, nu, e))


def _check_generate(rng, rec):
    ring, nv, m = random_setting(rng, max_m=3)
    D = canonical_hs(ring, m)
    G = random_hs(rng, ring, CoIdeal.tm(var_set("t", nv), m))
    phi = generate_subst(D, G)
    rec.compare((G,), G, act(phi, D))


def _check_external_action(rng, rec):
    ring, _, m = random_setting(rng, max_m=2)
    s = CoIdeal.tm(var_set("s", 1), m)
    t = CoIdeal.tm(var_set("t", rng.randint(1, 2)), m)
    u = CoIdeal.tm(var_set("u", 1), m)
    phi = random_subst(rng, ring, s, t)
    r, r2 = random_series(rng, ring, s), random_series(rng, ring, u)
    lhs = external_product(apply(phi, r), r2)
    rhs = apply(tensor(phi, identity_map(ring, u)), external_product(r, r2))
    rec.compare((phi, r, r2), lhs, rhs)


def _check_product_via_external(rng, rec):
    ring, nv, m = random_setting(rng, max_m=3)
    t = CoIdeal.tm(var_set("s", nv), m)
    primed = t.vars.primed()
    t2 = CoIdeal.tm(primed, m)
    big = CoIdeal.product(t, t2)
    sigma = inclusion(ring, big, t, list(range(nv)) * 2)
    r = random_series(rng, ring, t)
    r2 = random_series(rng, ring, t)
    r2p = Series(ring, primed, t2, r2.coeffs, check=False)
    rec.compare((r, r2), r * r2, apply(sigma, external_product(r, r2p)))


def _check_const_coeff_pairing(rng, rec):
    ring, nv, m = random_setting(rng, max_m=3)
    src = CoIdeal.tm(var_set("s", rng.randint(1, 2)), m)
    dst = CoIdeal.tm(var_set("t", nv), m)
    scalars = [ring.const(c) for c in (0, 1, -1, 2)]
    images = []
    for _ in src.vars:
        images.append(Series(ring, dst.vars, dst, {a: rng.choice(scalars) for a in dst.sorted() if any(a)}, check=False))
    phi = SubstMap(ring, src, dst, images, check=False)
    D = random_hs(rng, ring, src)
    a = random_series(rng, ring, src)
    rec.compare((phi, D, a), apply(phi, tilde_apply(D, a)), tilde_apply(act(phi, D), apply(phi, a)))


CHECKS: dict[str, Callable] = {
    "unit-inverse": _check_unit_inverse,
    "coefficient-formula": _check_coeff_formula,
    "composition-law": _check_composition_law,
    "multiplicativity": _check_multiplicativity,
    "apply-multiplicative": _check_apply_multiplicative,
    "hs-inverse-partition": _check_hs_inverse,
    "leibniz": _check_leibniz,
    "phiD-recursion": _check_phiD_recursion,
    "generate-roundtrip": _check_generate,
    "external-action": _check_external_action,
    "product-via-external": _check_product_via_external,
    "constant-coefficient-pairing": _check_const_coeff_pairing,
}

DEFAULT_SIZES = {name: 50 for name in CHECKS}


def run_suite(seed: int = 0, sizes: dict | None = None, perturb: bool = False, cancel=None) -> list[CheckReport]:
    """Run the named checks with the given instance counts; reports sorted by name.

    Every check draws from its own generator seeded from (seed, name), so
    the outcome of one check does not depend on which others run.
    """
    if sizes is None:
        sizes = DEFAULT_SIZES
    unknown = set(sizes) - set(CHECKS)
    if unknown:
        raise PreconditionError(f"unknown checks: {sorted(unknown)}")
    reports = []
    for name in sorted(sizes):
        rng = random.Random(f"{seed}:{name}")
        report = CheckReport(name)
        rec = _Recorder(report, perturb)
        for _ in range(sizes[name]):
            if cancel is not None and cancel.is_set():
                from .errors import Cancelled

                raise Cancelled("self-check cancelled")
            CHECKS[name](rng, rec)
        reports.append(report)
    return reports

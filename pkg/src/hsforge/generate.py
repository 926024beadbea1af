"""Writing an HS-derivation as phi . D for a generating D, and integrating derivations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .algebra import Derivation, Poly, PolyRing, solve_in_derivation_basis
from .errors import PreconditionError, ValidationError
from .hsderiv import HSDeriv, act, compose, invert, phi_apply, truncate_hs
from .multiindex import CoIdeal, VarSet
from .series import Series
from .substitution import SubstMap, extend_subst, split_top as _split_top, truncate_subst, zero_map

Solver = Callable[[Derivation, Sequence[Derivation]], Sequence[Poly]]


@dataclass
class GenerationProblem:
    """Find phi with act(phi, D) = G.

    ``D`` lives over (s, t_m) and its first-order components should generate
    the derivations of the ring; ``G`` lives over (t, t_m).  ``solver``
    returns coordinates of a derivation in the basis of first-order
    components and defaults to Cramer's rule over a square system.
    """

    D: HSDeriv
    G: HSDeriv
    solver: Solver | None = None


def _length(trunc: CoIdeal, what: str) -> int:
    if not trunc.is_tm():
        raise PreconditionError(f"{what} must be truncated at a full t_m, got {trunc}")
    return trunc.max_norm


def split_top(phi: SubstMap, m: int | None = None):
    """(phi_m, phi_{<m}) for a map between t_m truncations."""
    ms = _length(phi.src_trunc, "source")
    mt = _length(phi.dst_trunc, "target")
    if ms != mt:
        raise PreconditionError("source and target must have the same length")
    if m is None:
        m = ms
    if m != ms:
        raise PreconditionError(f"split degree {m} differs from the length {ms}")
    return _split_top(phi, m)


def first_order_basis(D: HSDeriv) -> list[Derivation]:
    """The derivations D_{s_j}, j over the variables of D."""
    out = []
    for u in D.vars.units():
        out.append(Derivation(D.ring, [img.coeff(u) for img in D.images]))
    return out


def _component_derivation(H: HSDeriv, e) -> Derivation:
    return Derivation(H.ring, [img.coeff(e) for img in H.images])


def _leibniz_spot_check(H: HSDeriv, e) -> bool:
    gens = H.ring.generators()
    for i, a in enumerate(gens):
        for b in gens[i:]:
            lhs = phi_apply(H, a * b).coeff(e)
            rhs = a * phi_apply(H, b).coeff(e) + b * phi_apply(H, a).coeff(e)
            if lhs != rhs:
                return False
    return True


def top_action_law(phi: SubstMap, D: HSDeriv, witnesses: Sequence[Poly] | None = None) -> bool:
    """Check the behaviour of the top part phi_m of phi acting on D.

    Verifies that (phi_m . D)_e vanishes for 0 < |e| < m and equals
    sum_s c^s_e D_{s} for |e| = m on the witnesses, and that
    phi . D = (phi_m . D) o (phi_{<m} . D) = (phi_{<m} . D) o (phi_m . D).
    """
    top, low = split_top(phi)
    m = phi.src_trunc.max_norm
    ring = D.ring
    if witnesses is None:
        witnesses = ring.monomials_up_to(m + 1)
    T = act(top, D)
    basis = [lambda w, u=u: phi_apply(D, w).coeff(u) for u in D.vars.units()]
    for w in witnesses:
        image = phi_apply(T, w)
        for e in phi.dst_trunc.sorted():
            n = sum(e)
            if n == 0:
                continue
            got = image.coeff(e)
            if n < m:
                if got:
                    return False
            else:
                want = ring.zero()
                for img, op in zip(top.images, basis):
                    c = img.coeff(e)
                    if c:
                        want = want + c * op(w)
                if got != want:
                    return False
    full = act(phi, D)
    L = act(low, D)
    return compose(T, L) == full and compose(L, T) == full


def generate_stages(problem: GenerationProblem) -> Iterator[SubstMap]:
    """Yield the maps phi_r over t_r, r = 1..m, with act(phi_r, tau_r D) = tau_r G."""
    D, G = problem.D, problem.G
    solver = problem.solver or solve_in_derivation_basis
    if D.ring != G.ring:
        raise PreconditionError("D and G must act on the same ring")
    m = _length(D.trunc, "D")
    if _length(G.trunc, "G") != m:
        raise PreconditionError("D and G must have the same length")
    ring = D.ring
    basis = first_order_basis(D)
    phi = zero_map(ring, D.trunc.slice(0), G.trunc.slice(0))
    for r in range(1, m + 1):
        src, dst = D.trunc.slice(r), G.trunc.slice(r)
        lifted = extend_subst(phi, src, dst, check=False)
        Dr, Gr = truncate_hs(D, r), truncate_hs(G, r)
        F = act(lifted, Dr)
        H = compose(Gr, invert(F))
        grafts = [dict(img.coeffs) for img in lifted.images]
        for e in dst.sorted():
            n = sum(e)
            if n == 0:
                continue
            delta = _component_derivation(H, e)
            if n < r:
                if any(delta.images):
                    raise ValidationError(f"stage {r}: lower component at {e} does not vanish")
                continue
            if not any(delta.images):
                continue
            if not _leibniz_spot_check(H, e):
                raise ValidationError(f"stage {r}: component at {e} is not a derivation")
            coords = solver(delta, basis)
            for j, c in enumerate(coords):
                if c:
                    grafts[j][e] = c
        images = [Series(ring, dst.vars, dst, g, check=False) for g in grafts]
        phi = SubstMap(ring, src, dst, images, check=False)
        yield phi


def generate_subst(problem, G: HSDeriv | None = None, solver: Solver | None = None) -> SubstMap:
    """A substitution map phi with act(phi, D) = G.

    Accepts a GenerationProblem or the pair (D, G).
    """
    if not isinstance(problem, GenerationProblem):
        problem = GenerationProblem(problem, G, solver)
    phi = None
    for phi in generate_stages(problem):
        pass
    if phi is None:
        return zero_map(problem.D.ring, problem.D.trunc, problem.G.trunc)
    return phi


def verify_uniqueness(D: HSDeriv, phi: SubstMap, psi: SubstMap | None = None, solver: Solver | None = None) -> bool:
    """Regenerate from act(phi, D) and demand phi back (and psi, if it has the same action)."""
    G = act(phi, D)
    again = generate_subst(D, G, solver)
    if again != phi:
        return False
    if psi is not None and act(psi, D) == G:
        return again == psi
    return True


def canonical_vars(n: int) -> VarSet:
    return VarSet(tuple(f"s{i}" for i in range(1, n + 1)))


def canonical_hs(ring: PolyRing, m: int, vars: VarSet | None = None) -> HSDeriv:
    """Taylor expansion: Phi(x_i) = x_i + s_i over t_m, components the divided-power partials."""
    if vars is None:
        vars = canonical_vars(ring.ngens)
    if len(vars) != ring.ngens:
        raise PreconditionError("one series variable per generator is required")
    trunc = CoIdeal.tm(vars, m)
    images = []
    for x, u in zip(ring.generators(), vars.units()):
        images.append(Series(ring, vars, trunc, {vars.zero(): x, u: ring.one()} if m >= 1 else {vars.zero(): x}, check=False))
    return HSDeriv(ring, trunc, images, check=False)


def integrate(E: HSDeriv, m: int, vars: VarSet | None = None) -> HSDeriv:
    """An HS-derivation of length m whose truncation to the length of E is E."""
    n = _length(E.trunc, "E")
    if m < n:
        raise PreconditionError(f"target length {m} is shorter than {n}")
    C = canonical_hs(E.ring, m, vars)
    phi = generate_subst(truncate_hs(C, n), E)
    lifted = extend_subst(phi, C.trunc, CoIdeal.tm(E.vars, m), check=False)
    return act(lifted, C)


def integrate_stream(E: HSDeriv, vars: VarSet | None = None) -> Iterator[HSDeriv]:
    """integrate(E, m) for m = n, n+1, ...; each term truncates to the previous one."""
    m = _length(E.trunc, "E")
    while True:
        yield integrate(E, m, vars)
        m += 1


def stage_truncations_agree(problem: GenerationProblem) -> bool:
    """Each stage is the truncation of the final map."""
    stages = list(generate_stages(problem))
    if not stages:
        return True
    final = stages[-1]
    return all(truncate_subst(final, r) == st for r, st in enumerate(stages, start=1))

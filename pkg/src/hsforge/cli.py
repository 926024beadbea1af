"""Command-line front end.

Documents are read from file arguments (``-`` for standard input) or, when
no file is given, from standard input, where a JSON array supplies several
documents at once.  Results go to standard output as canonical JSON, or as
text with ``--pretty``.  Errors are reported on standard output as
``{"type": "error", ...}`` with exit status 1 (malformed input or
validation failure) or 2 (violated precondition); a failing ``selfcheck``
exits with 3.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import documents as docs
from . import generate as gen
from . import hsderiv as hs
from . import multiindex as mi
from . import oracle
from . import series as ser
from . import substitution as sub
from .algebra import Derivation, derivation_apply, solve_in_derivation_basis
from .errors import HSForgeError, ParseError, PreconditionError, ValidationError

# Library operation -> subcommand reaching it.
OPS = {
    "multiindex.add": "mi add",
    "multiindex.leq": "mi leq",
    "multiindex.join": "mi join",
    "multiindex.below": "mi below",
    "multiindex.coideal_tm": "mi tm",
    "multiindex.coideal_ops": "mi coideal",
    "multiindex.minimal_outside": "mi minimal-outside",
    "multiindex.enum_ordered_partitions": "mi partitions",
    "multiindex.enum_indexed_partitions": "mi indexed-partitions",
    "algebra.poly_arith": "poly arith",
    "algebra.derivation_apply": "poly derive",
    "algebra.solve_in_derivation_basis": "poly solve",
    "series.series_add": "series add",
    "series.series_mul": "series mul",
    "series.truncate": "series truncate",
    "series.is_unit": "series is-unit",
    "series.invert_recursive": "series invert",
    "series.invert_partition": "series invert --method partition",
    "series.external_product": "series external",
    "substitution.make_subst": "subst make",
    "substitution.validate": "subst validate",
    "substitution.coeff": "subst coeff",
    "substitution.apply": "subst apply",
    "substitution.compose": "subst compose",
    "substitution.add": "subst add",
    "substitution.tensor": "subst tensor",
    "substitution.power_map": "subst power",
    "substitution.has_constant_coeffs": "subst constant",
    "substitution.truncate_subst": "subst truncate",
    "substitution.check_multiplicativity_table": "subst table-check",
    "hsderiv.phi_apply": "hs phi",
    "hsderiv.component": "hs component",
    "hsderiv.tilde_apply": "hs tilde",
    "hsderiv.compose": "hs compose",
    "hsderiv.invert": "hs invert",
    "hsderiv.ell": "hs ell",
    "hsderiv.commutator": "hs commutator",
    "hsderiv.external": "hs external",
    "hsderiv.act": "hs act",
    "hsderiv.phi_upper_D": "phid",
    "hsderiv.d_of_phi": "hs d-of-phi",
    "hsderiv.is_iterative": "hs iterative",
    "hsderiv.op_order_at_most": "hs order",
    "generate.split_top": "subst split",
    "generate.top_action_law": "top-law",
    "generate.generate_subst": "generate",
    "generate.verify_uniqueness": "unique",
    "generate.canonical_hs": "hs canonical",
    "generate.integrate": "integrate",
    "oracle.direct_C": "oracle direct-c",
    "oracle.hs_inverse_partition": "oracle hs-inverse",
    "oracle.phiD_recursive_C": "oracle phid-recursive",
    "oracle.run_suite": "selfcheck",
    "cli.run": "hsforge",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(f"{self.prog}: {message}")


# -- input helpers --------------------------------------------------------------


class _Inputs:
    def __init__(self, stdin):
        self.stdin = stdin
        self._stdin_docs = None

    def _from_stdin(self):
        if self._stdin_docs is None:
            raw = docs.loads(self.stdin.read())
            self._stdin_docs = raw if isinstance(raw, list) else [raw]
        return self._stdin_docs

    def load(self, paths, count):
        found = []
        for p in paths or []:
            if p == "-":
                found.extend(self._from_stdin())
            else:
                try:
                    with open(p, encoding="utf-8") as fh:
                        found.append(docs.loads(fh.read()))
                except OSError as exc:
                    raise ParseError(f"cannot read {p}: {exc.strerror}") from None
        if not paths:
            found = list(self._from_stdin())
        if len(found) != count:
            raise ParseError(f"expected {count} document(s), got {len(found)}")
        return found


def _obj(doc, cls, what, check=True):
    val = docs.decode(doc, check=check)
    if not isinstance(val, cls):
        raise ParseError(f"expected a {what} document")
    return val


def _json_arg(text, what):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise ParseError(f"{what} must be JSON, got {text!r}") from None


def _varset(text) -> mi.VarSet:
    names = [n.strip() for n in text.split(",") if n.strip()] if text else []
    try:
        return mi.VarSet(tuple(names))
    except Exception as exc:
        raise ParseError(str(exc)) from None


def _index(vars: mi.VarSet, text) -> tuple:
    return docs.decode_exps(vars.names, _json_arg(text, "multi-index"))


def _ring_arg(args):
    return docs.decode_ring(_json_arg(args.ring, "ring"))


def _trunc_arg(vars, text):
    return docs.decode_coideal(vars, _json_arg(text, "truncation"))


# -- output helpers ---------------------------------------------------------------


def _indices_doc(vars, items):
    return {"type": "multi-indices", "vars": list(vars.names), "items": [docs.encode_exps(vars.names, a) for a in items]}


def _text_indices(vars, items):
    return "\n".join(repr(mi.MultiIndex(vars, a)) for a in items) or "(none)"


class _Out:
    """A result carrying both its JSON document and its text rendering."""

    def __init__(self, doc, text):
        self.doc = doc
        self.text = text


def _value(v):
    if isinstance(v, _Out):
        return v
    if isinstance(v, float) and v == math.inf or isinstance(v, int) and not isinstance(v, bool):
        return _Out(docs.encode_ell(v), "inf" if v == math.inf else str(v))
    return _Out(docs.encode(v), docs.render(v))


# -- command implementations ------------------------------------------------------


def cmd_mi(args, inputs):
    vars = _varset(args.vars)
    op = args.op
    if op in ("add", "leq", "join"):
        a, b = _index(vars, args.a), _index(vars, args.b)
        if op == "add":
            r = mi.add_exps(a, b)
        elif op == "join":
            r = mi.join_exps(a, b)
        else:
            return _value(mi.leq_exps(a, b))
        return _Out({"type": "multi-index", "vars": list(vars.names), "value": docs.encode_exps(vars.names, r)}, repr(mi.MultiIndex(vars, r)))
    if op == "below":
        items = mi.below_exps(_index(vars, args.a))
        return _Out(_indices_doc(vars, items), _text_indices(vars, items))
    if op == "tm":
        items = mi.CoIdeal.tm(vars, args.m).sorted()
        return _Out(_indices_doc(vars, items), _text_indices(vars, items))
    if op == "coideal":
        a = _trunc_arg(vars, args.a)
        if args.how == "slice":
            r = a.slice(args.m)
        else:
            b = _trunc_arg(vars, args.b)
            r = a & b if args.how == "intersection" else a | b
        items = r.sorted()
        return _Out(_indices_doc(vars, items), _text_indices(vars, items))
    if op == "minimal-outside":
        items = mi.minimal_outside_exps(_trunc_arg(vars, args.a), args.cap)
        return _Out(_indices_doc(vars, items), _text_indices(vars, items))
    if op == "partitions":
        alpha = mi.MultiIndex(vars, _index(vars, args.a))
        parts = mi.enum_ordered_partitions(alpha, args.d)
        doc = {"type": "partitions", "vars": list(vars.names), "items": [[p.to_dict() for p in tup] for tup in parts]}
        return _Out(doc, "\n".join(" + ".join(repr(p) for p in tup) for tup in parts) or "(none)")
    if op == "indexed-partitions":
        uvars = _varset(args.uvars)
        e = mi.MultiIndex(uvars, _index(uvars, args.e))
        alpha = mi.MultiIndex(vars, _index(vars, args.a))
        parts = mi.enum_indexed_partitions(e, alpha)
        items = [[[t, r, p.to_dict()] for (t, r), p in ip.assignment] for ip in parts]
        text = "\n".join(", ".join(f"({t},{r})->{p!r}" for (t, r), p in ip.assignment) for ip in parts)
        return _Out({"type": "indexed-partitions", "items": items}, text or "(none)")
    raise ParseError(f"unknown mi operation {op}")


def cmd_poly(args, inputs):
    ring = _ring_arg(args)
    if args.op == "arith":
        a = docs.decode_poly(ring, args.a)
        b = docs.decode_poly(ring, args.b) if args.b is not None else None
        how = args.how
        if how in ("add", "sub", "mul") and b is None:
            raise ParseError(f"{how} needs --b")
        if how == "add":
            r = a + b
        elif how == "sub":
            r = a - b
        elif how == "mul":
            r = a * b
        elif how == "neg":
            r = -a
        elif how == "scale":
            r = a.scale(ring.field.coerce(args.scalar))
        elif how == "eq":
            return _value(a == b)
        else:
            return _value(a.is_zero())
        return _value(r)
    if args.op == "derive":
        d = Derivation(ring, [docs.decode_poly(ring, t) for t in args.images])
        return _value(derivation_apply(d, docs.decode_poly(ring, args.a)))
    if args.op == "solve":
        delta = Derivation(ring, [docs.decode_poly(ring, t) for t in _json_arg(args.delta, "delta")])
        basis = [Derivation(ring, [docs.decode_poly(ring, t) for t in row]) for row in _json_arg(args.basis, "basis")]
        coords = solve_in_derivation_basis(delta, basis)
        doc = {"type": "coordinates", "ring": docs.encode_ring(ring), "coords": [docs.encode_poly(c) for c in coords]}
        return _Out(doc, ", ".join(repr(c) for c in coords))
    raise ParseError(f"unknown poly operation {args.op}")


def cmd_series(args, inputs):
    op = args.op
    if op in ("invert", "is-unit"):
        (d,) = inputs.load(args.docs, 1)
        f = _obj(d, ser.Series, "series")
        if op == "is-unit":
            return _value(ser.is_unit(f))
        return _value(ser.invert_partition(f) if args.method == "partition" else ser.invert_recursive(f))
    if op == "truncate":
        (d,) = inputs.load(args.docs, 1)
        f = _obj(d, ser.Series, "series")
        return _value(ser.truncate(f, _trunc_arg(f.vars, args.to)))
    a, b = (_obj(d, ser.Series, "series") for d in inputs.load(args.docs, 2))
    if op == "add":
        return _value(a + b)
    if op == "mul":
        return _value(a * b)
    return _value(ser.external_product(a, b))


def cmd_subst(args, inputs):
    op = args.op
    if op == "make":
        ring = _ring_arg(args)
        src_vars, dst_vars = _varset(args.src), _varset(args.dst)
        src = _trunc_arg(src_vars, args.src_trunc)
        dst = _trunc_arg(dst_vars, args.dst_trunc)
        images = _json_arg(args.images, "images")
        if not isinstance(images, dict):
            raise ParseError("images must be an object")
        return _value(sub.make_subst({k: str(v) for k, v in images.items()}, src, dst, ring))
    if op == "power":
        ring = _ring_arg(args)
        vars = _varset(args.vars)
        nu = _json_arg(args.nu, "exponents")
        if not isinstance(nu, dict):
            raise ParseError("exponents must be an object")
        return _value(sub.power_map(ring, nu, _trunc_arg(vars, args.trunc)))
    if op == "validate":
        (d,) = inputs.load(args.docs, 1)
        return _value(sub.validate(_obj(d, sub.SubstMap, "substitution map", check=False)))
    if op in ("compose", "add", "tensor"):
        a, b = (_obj(d, sub.SubstMap, "substitution map") for d in inputs.load(args.docs, 2))
        fn = {"compose": sub.compose, "add": sub.add, "tensor": sub.tensor}[op]
        return _value(fn(a, b))
    if op == "apply":
        d1, d2 = inputs.load(args.docs, 2)
        return _value(sub.apply(_obj(d1, sub.SubstMap, "substitution map"), _obj(d2, ser.Series, "series")))
    (d,) = inputs.load(args.docs, 1)
    phi = _obj(d, sub.SubstMap, "substitution map")
    if op == "coeff":
        return _value(sub.coeff(phi, _index(phi.src_vars, args.alpha), _index(phi.dst_vars, args.e)))
    if op == "truncate":
        return _value(sub.truncate_subst(phi, args.n))
    if op == "constant":
        return _value(sub.has_constant_coeffs(phi))
    if op == "table-check":
        K = sub.table_from_subst(phi)
        if args.perturb:
            keys = sub.perturbable_entries(K)
            if not keys:
                raise PreconditionError("no entry to perturb")
            K = sub.perturb_table(K, keys[0])
        return _value(sub.check_multiplicativity_table(K))
    if op == "split":
        top, low = gen.split_top(phi)
        doc = {"type": "split", "top": docs.encode(top), "low": docs.encode(low)}
        return _Out(doc, f"top:\n{docs.render(top)}\nlow:\n{docs.render(low)}")
    raise ParseError(f"unknown subst operation {op}")


def cmd_hs(args, inputs):
    op = args.op
    if op == "canonical":
        return _value(gen.canonical_hs(_ring_arg(args), args.m))
    if op in ("compose", "commutator", "external"):
        a, b = (_obj(d, hs.HSDeriv, "HS-derivation") for d in inputs.load(args.docs, 2))
        return _value({"compose": hs.compose, "commutator": hs.commutator, "external": hs.external}[op](a, b))
    if op == "act":
        d1, d2 = inputs.load(args.docs, 2)
        return _value(hs.act(_obj(d1, sub.SubstMap, "substitution map"), _obj(d2, hs.HSDeriv, "HS-derivation")))
    if op == "d-of-phi":
        d1, d2 = inputs.load(args.docs, 2)
        return _value(hs.d_of_phi(_obj(d1, hs.HSDeriv, "HS-derivation"), _obj(d2, sub.SubstMap, "substitution map")))
    if op == "tilde":
        d1, d2 = inputs.load(args.docs, 2)
        return _value(hs.tilde_apply(_obj(d1, hs.HSDeriv, "HS-derivation"), _obj(d2, ser.Series, "series")))
    (d,) = inputs.load(args.docs, 1)
    D = _obj(d, hs.HSDeriv, "HS-derivation")
    if op == "invert":
        return _value(hs.invert(D))
    if op == "ell":
        return _value(hs.ell(D))
    if op == "iterative":
        return _value(hs.is_iterative(D))
    if op == "phi":
        return _value(hs.phi_apply(D, docs.decode_poly(D.ring, args.a)))
    if op == "component":
        return _value(hs.component(D, _index(D.vars, args.alpha), docs.decode_poly(D.ring, args.a)))
    if op == "order":
        h = hs.OperatorHandle(D, _index(D.vars, args.alpha))
        witnesses = [docs.decode_poly(D.ring, w) for w in args.witness] if args.witness else None
        return _value(hs.op_order_at_most(h, args.n, witnesses))
    raise ParseError(f"unknown hs operation {op}")


def cmd_phid(args, inputs):
    d1, d2 = inputs.load(args.docs, 2)
    return _value(hs.phi_upper_D(_obj(d1, sub.SubstMap, "substitution map"), _obj(d2, hs.HSDeriv, "HS-derivation")))


def cmd_generate(args, inputs):
    d1, d2 = inputs.load(args.docs, 2)
    return _value(gen.generate_subst(_obj(d1, hs.HSDeriv, "HS-derivation"), _obj(d2, hs.HSDeriv, "HS-derivation")))


def cmd_integrate(args, inputs):
    (d,) = inputs.load(args.docs, 1)
    return _value(gen.integrate(_obj(d, hs.HSDeriv, "HS-derivation"), args.m))


def cmd_top_law(args, inputs):
    d1, d2 = inputs.load(args.docs, 2)
    return _value(gen.top_action_law(_obj(d1, sub.SubstMap, "substitution map"), _obj(d2, hs.HSDeriv, "HS-derivation")))


def cmd_unique(args, inputs):
    loaded = inputs.load(args.docs, 3 if args.with_psi else 2)
    D = _obj(loaded[0], hs.HSDeriv, "HS-derivation")
    phi = _obj(loaded[1], sub.SubstMap, "substitution map")
    psi = _obj(loaded[2], sub.SubstMap, "substitution map") if args.with_psi else None
    return _value(gen.verify_uniqueness(D, phi, psi))


def cmd_oracle(args, inputs):
    if args.op == "hs-inverse":
        (d,) = inputs.load(args.docs, 1)
        D = _obj(d, hs.HSDeriv, "HS-derivation")
        return _value(oracle.hs_inverse_partition(D, _index(D.vars, args.alpha), docs.decode_poly(D.ring, args.a)))
    if args.op == "direct-c":
        (d,) = inputs.load(args.docs, 1)
        phi = _obj(d, sub.SubstMap, "substitution map")
        return _value(oracle.direct_C(phi, _index(phi.src_vars, args.alpha), _index(phi.dst_vars, args.e)))
    d1, d2 = inputs.load(args.docs, 2)
    phi = _obj(d1, sub.SubstMap, "substitution map")
    D = _obj(d2, hs.HSDeriv, "HS-derivation")
    return _value(oracle.phiD_recursive_C(phi, D, _index(phi.src_vars, args.alpha), _index(phi.dst_vars, args.e)))


def _parse_sizes(text):
    if text is None:
        return None
    text = text.strip()
    if not text:
        return {}
    if text.isdigit():
        return {name: int(text) for name in oracle.CHECKS}
    sizes = {}
    for item in text.split(","):
        name, _, count = item.partition("=")
        if not count.strip().isdigit():
            raise ParseError(f"bad size entry {item!r}; use name=count")
        sizes[name.strip()] = int(count)
    return sizes


def resolve_seed(explicit, environ=None):
    """An explicit --seed wins, then HSFORGE_SEED, then 0."""
    if explicit is not None:
        return explicit
    env = (os.environ if environ is None else environ).get("HSFORGE_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise ParseError(f"HSFORGE_SEED must be an integer, got {env!r}") from None


def cmd_selfcheck(args, inputs):
    seed = resolve_seed(args.seed)
    reports = oracle.run_suite(seed, _parse_sizes(args.sizes), perturb=args.perturb)
    passed = all(r.passed for r in reports)
    doc = {"type": "selfcheck", "seed": seed, "passed": passed, "checks": [r.to_json() for r in reports]}
    lines = [f"{'PASS' if r.passed else 'FAIL'} {r.name} ({r.instances} instances, {len(r.failures)} failures)" for r in reports]
    lines.append(f"seed {seed}: {'all checks passed' if passed else 'FAILURES'}")
    out = _Out(doc, "\n".join(lines))
    out.exit = 0 if passed else 3
    return out


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hsforge", description="Truncated power series, substitution maps and Hasse-Schmidt derivations.")
    p.add_argument("--pretty", action="store_true", help="human-readable output instead of JSON")
    top = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def docs_arg(sp, help="document files, '-' for standard input"):
        sp.add_argument("docs", nargs="*", help=help)

    # multi-indices
    g = top.add_parser("mi", help="multi-indices, co-ideals and partitions")
    s = g.add_subparsers(dest="op", required=True, parser_class=_Parser)
    for name in ("add", "leq", "join"):
        sp = s.add_parser(name)
        sp.add_argument("--vars", required=True)
        sp.add_argument("--a", required=True)
        sp.add_argument("--b", required=True)
    sp = s.add_parser("below")
    sp.add_argument("--vars", required=True)
    sp.add_argument("--a", required=True)
    sp = s.add_parser("tm")
    sp.add_argument("--vars", required=True)
    sp.add_argument("--m", type=int, required=True)
    sp = s.add_parser("coideal")
    sp.add_argument("--vars", required=True)
    sp.add_argument("--how", choices=("intersection", "union", "slice"), required=True)
    sp.add_argument("--a", required=True)
    sp.add_argument("--b")
    sp.add_argument("--m", type=int, default=0)
    sp = s.add_parser("minimal-outside")
    sp.add_argument("--vars", required=True)
    sp.add_argument("--a", required=True)
    sp.add_argument("--cap", type=int, required=True)
    sp = s.add_parser("partitions")
    sp.add_argument("--vars", required=True)
    sp.add_argument("--a", required=True)
    sp.add_argument("--d", type=int, required=True)
    sp = s.add_parser("indexed-partitions")
    sp.add_argument("--vars", required=True)
    sp.add_argument("--a", required=True)
    sp.add_argument("--uvars", required=True)
    sp.add_argument("--e", required=True)
    g.set_defaults(fn=cmd_mi)

    # polynomials
    g = top.add_parser("poly", help="polynomial arithmetic and derivations")
    s = g.add_subparsers(dest="op", required=True, parser_class=_Parser)
    sp = s.add_parser("arith")
    sp.add_argument("--ring", required=True)
    sp.add_argument("--how", choices=("add", "sub", "mul", "neg", "scale", "eq", "is-zero"), required=True)
    sp.add_argument("--a", required=True)
    sp.add_argument("--b")
    sp.add_argument("--scalar", default="1")
    sp = s.add_parser("derive")
    sp.add_argument("--ring", required=True)
    sp.add_argument("--images", nargs="+", required=True)
    sp.add_argument("--a", required=True)
    sp = s.add_parser("solve")
    sp.add_argument("--ring", required=True)
    sp.add_argument("--delta", required=True)
    sp.add_argument("--basis", required=True)
    g.set_defaults(fn=cmd_poly)

    # series
    g = top.add_parser("series", help="truncated power series")
    s = g.add_subparsers(dest="op", required=True, parser_class=_Parser)
    sp = s.add_parser("invert")
    sp.add_argument("--method", choices=("recursive", "partition"), default="recursive")
    docs_arg(sp)
    for name in ("mul", "add", "external", "is-unit"):
        docs_arg(s.add_parser(name))
    sp = s.add_parser("truncate")
    sp.add_argument("--to", required=True)
    docs_arg(sp)
    g.set_defaults(fn=cmd_series)

    # substitution maps
    g = top.add_parser("subst", help="substitution maps")
    s = g.add_subparsers(dest="op", required=True, parser_class=_Parser)
    for name in ("apply", "add", "tensor", "validate", "constant", "split"):
        docs_arg(s.add_parser(name))
    docs_arg(s.add_parser("compose", help="documents psi, phi; prints psi after phi"))
    sp = s.add_parser("coeff")
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--e", required=True)
    docs_arg(sp)
    sp = s.add_parser("truncate")
    sp.add_argument("--n", type=int, required=True)
    docs_arg(sp)
    sp = s.add_parser("table-check")
    sp.add_argument("--perturb", action="store_true")
    docs_arg(sp)
    sp = s.add_parser("make")
    sp.add_argument("--ring", required=True)
    sp.add_argument("--src", required=True)
    sp.add_argument("--src-trunc", required=True)
    sp.add_argument("--dst", required=True)
    sp.add_argument("--dst-trunc", required=True)
    sp.add_argument("--images", required=True)
    sp = s.add_parser("power")
    sp.add_argument("--ring", required=True)
    sp.add_argument("--vars", required=True)
    sp.add_argument("--trunc", required=True)
    sp.add_argument("--nu", required=True)
    g.set_defaults(fn=cmd_subst)

    # HS-derivations
    g = top.add_parser("hs", help="Hasse-Schmidt derivations")
    s = g.add_subparsers(dest="op", required=True, parser_class=_Parser)
    for name in ("compose", "invert", "ell", "external", "commutator", "iterative", "tilde"):
        docs_arg(s.add_parser(name))
    docs_arg(s.add_parser("act", help="documents phi, D; prints phi . D"))
    docs_arg(s.add_parser("d-of-phi", help="documents D, phi; prints D(phi)"))
    sp = s.add_parser("component")
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--a", required=True)
    docs_arg(sp)
    sp = s.add_parser("phi")
    sp.add_argument("--a", required=True)
    docs_arg(sp)
    sp = s.add_parser("order")
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--witness", action="append")
    docs_arg(sp)
    sp = s.add_parser("canonical")
    sp.add_argument("--ring", required=True)
    sp.add_argument("--m", type=int, required=True)
    g.set_defaults(fn=cmd_hs)

    sp = top.add_parser("phid", help="the twisted map phi^D from (phi, D)")
    docs_arg(sp)
    sp.set_defaults(fn=cmd_phid)
    sp = top.add_parser("generate", help="phi with act(phi, D) = G from (D, G)")
    docs_arg(sp)
    sp.set_defaults(fn=cmd_generate)
    sp = top.add_parser("integrate", help="extend an HS-derivation to length m")
    sp.add_argument("--m", type=int, required=True)
    docs_arg(sp)
    sp.set_defaults(fn=cmd_integrate)
    sp = top.add_parser("top-law", help="check the top-degree action law for (phi, D)")
    docs_arg(sp)
    sp.set_defaults(fn=cmd_top_law)
    sp = top.add_parser("unique", help="regeneration check for (D, phi[, psi])")
    sp.add_argument("--with-psi", action="store_true")
    docs_arg(sp)
    sp.set_defaults(fn=cmd_unique)

    g = top.add_parser("oracle", help="brute-force reference computations")
    s = g.add_subparsers(dest="op", required=True, parser_class=_Parser)
    for name in ("direct-c", "phid-recursive"):
        sp = s.add_parser(name)
        sp.add_argument("--alpha", required=True)
        sp.add_argument("--e", required=True)
        docs_arg(sp)
    sp = s.add_parser("hs-inverse")
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--a", required=True)
    docs_arg(sp)
    g.set_defaults(fn=cmd_oracle)

    sp = top.add_parser("selfcheck", help="run the randomized cross-check suite")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--sizes", help="'name=count,...' or one count for every check; empty runs nothing")
    sp.add_argument("--perturb", action="store_true", help="flip one compared coefficient per check")
    sp.set_defaults(fn=cmd_selfcheck)
    return p


def run(argv=None, stdin=None, stdout=None) -> int:
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    pretty = False
    try:
        args = build_parser().parse_args(argv)
        pretty = args.pretty
        out = args.fn(args, _Inputs(stdin))
    except HSForgeError as exc:
        code = 2 if isinstance(exc, PreconditionError) else 1
        err = {"type": "error", "kind": exc.kind, "message": str(exc)}
        stdout.write(f"error ({exc.kind}): {exc}\n" if pretty else docs.dumps(err))
        return code
    stdout.write(out.text + "\n" if pretty else docs.dumps(out.doc))
    return getattr(out, "exit", 0)


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())

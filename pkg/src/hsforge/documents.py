"""JSON documents for rings, polynomials, series, substitution maps and HS-derivations.

Every top-level document is an object tagged with ``"type"``.  Encoding is
canonical: keys and multi-index entries follow the variable order of the
document header, coefficients are sorted graded-lexicographically, and the
same value always serializes to the same bytes.

On input, polynomials and series may also be written as expression strings
(``"x^2 + 1"``, ``"1 + x*s"``); they are normalized on output.
"""

from __future__ import annotations

import json
import math

from .algebra import GF, QQ, Field, Poly, PolyRing
from .errors import ParseError
from .hsderiv import HSDeriv
from .multiindex import CoIdeal, MultiIndex, VarSet
from .series import Series
from .substitution import SubstMap


# -- scalars and rings ----------------------------------------------------------


def encode_scalar(field: Field, c):
    return field.to_json(c)


def decode_scalar(field: Field, v):
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise ParseError(f"scalar must be an integer or a string, got {v!r}")
    try:
        return field.coerce(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad scalar {v!r}: {exc}") from None


def encode_ring(ring: PolyRing) -> dict:
    out = {"field": "Q" if ring.field.p == 0 else "GF"}
    if ring.field.p:
        out["p"] = ring.field.p
    out["gens"] = list(ring.gens)
    return out


def decode_ring(doc) -> PolyRing:
    _need_obj(doc, "ring")
    kind = doc.get("field")
    if kind == "Q":
        field = QQ
    elif kind == "GF":
        p = doc.get("p")
        if not isinstance(p, int) or isinstance(p, bool):
            raise ParseError("GF ring needs an integer p")
        try:
            field = GF(p)
        except Exception as exc:
            raise ParseError(str(exc)) from None
    else:
        raise ParseError(f"unknown field {kind!r}")
    gens = doc.get("gens", [])
    if not isinstance(gens, list) or not all(isinstance(g, str) for g in gens):
        raise ParseError("gens must be a list of names")
    try:
        return PolyRing(field, tuple(gens))
    except Exception as exc:
        raise ParseError(str(exc)) from None


# -- multi-indices and co-ideals --------------------------------------------------


def encode_exps(names, exps) -> dict:
    return {n: k for n, k in zip(names, exps) if k}


def decode_exps(names, doc) -> tuple:
    _need_obj(doc, "multi-index")
    unknown = set(doc) - set(names)
    if unknown:
        raise ParseError(f"unknown variables {sorted(unknown)}")
    out = []
    for n in names:
        k = doc.get(n, 0)
        if not isinstance(k, int) or isinstance(k, bool) or k < 0:
            raise ParseError(f"exponent of {n} must be a non-negative integer")
        out.append(k)
    return tuple(out)


def encode_coideal(trunc: CoIdeal) -> dict:
    kind = trunc.descriptor[0]
    names = trunc.vars.names
    if kind == "tm" or trunc.is_tm():
        return {"kind": "tm", "m": trunc.max_norm}
    if kind == "nbeta":
        return {"kind": "nbeta", "beta": encode_exps(names, trunc.descriptor[1])}
    return {"kind": "explicit", "members": [encode_exps(names, a) for a in trunc.sorted()]}


def decode_coideal(vars: VarSet, doc) -> CoIdeal:
    _need_obj(doc, "truncation")
    kind = doc.get("kind")
    try:
        if kind == "tm":
            m = doc.get("m")
            if not isinstance(m, int) or isinstance(m, bool):
                raise ParseError("t_m needs an integer m")
            return CoIdeal.tm(vars, m)
        if kind == "nbeta":
            return CoIdeal.nbeta(MultiIndex(vars, decode_exps(vars.names, doc.get("beta", {}))))
        if kind == "explicit":
            members = doc.get("members")
            if not isinstance(members, list):
                raise ParseError("explicit co-ideal needs a members list")
            return CoIdeal.explicit(vars, [decode_exps(vars.names, a) for a in members])
    except ParseError:
        raise
    except Exception as exc:
        raise ParseError(str(exc)) from None
    raise ParseError(f"unknown co-ideal kind {kind!r}")


def decode_varset(doc) -> VarSet:
    if not isinstance(doc, list) or not all(isinstance(n, str) for n in doc):
        raise ParseError("vars must be a list of names")
    try:
        return VarSet(tuple(doc))
    except Exception as exc:
        raise ParseError(str(exc)) from None


# -- polynomials and series -------------------------------------------------------


def encode_poly(p: Poly) -> list:
    field = p.ring.field
    return [[encode_exps(p.ring.gens, e), encode_scalar(field, c)] for e, c in p.sorted_terms()]


def decode_poly(ring: PolyRing, doc) -> Poly:
    if isinstance(doc, str):
        try:
            return ring.parse(doc)
        except ParseError:
            raise
        except Exception as exc:
            raise ParseError(f"cannot read polynomial {doc!r}: {exc}") from None
    if isinstance(doc, int) and not isinstance(doc, bool):
        return ring.const(doc)
    if not isinstance(doc, list):
        raise ParseError("polynomial must be a list of [exponents, scalar] pairs or an expression")
    terms = {}
    for item in doc:
        if not isinstance(item, list) or len(item) != 2:
            raise ParseError("polynomial terms are [exponents, scalar] pairs")
        e = decode_exps(ring.gens, item[0])
        if e in terms:
            raise ParseError(f"repeated monomial {item[0]}")
        terms[e] = decode_scalar(ring.field, item[1])
    return Poly(ring, terms)


def encode_series_body(f: Series) -> dict:
    return {
        "vars": list(f.vars.names),
        "trunc": encode_coideal(f.trunc),
        "coeffs": [[encode_exps(f.vars.names, a), encode_poly(c)] for a, c in f.items()],
    }


def decode_series_body(ring: PolyRing, doc, vars: VarSet | None = None, trunc: CoIdeal | None = None) -> Series:
    """A series object, or an expression string when the universe is known."""
    if isinstance(doc, str):
        if vars is None:
            raise ParseError("a series expression needs its variables and truncation")
        try:
            return Series.parse(ring, vars, trunc, doc)
        except ParseError:
            raise
        except Exception as exc:
            raise ParseError(f"cannot read series {doc!r}: {exc}") from None
    _need_obj(doc, "series")
    v = decode_varset(doc["vars"]) if "vars" in doc else vars
    if v is None:
        raise ParseError("series needs vars")
    t = decode_coideal(v, doc["trunc"]) if "trunc" in doc else trunc
    if t is None:
        raise ParseError("series needs trunc")
    if vars is not None and (v != vars or t != trunc):
        raise ParseError(f"series over ({v}, {t}) where ({vars}, {trunc}) is expected")
    if "expr" in doc:
        return decode_series_body(ring, doc["expr"], v, t)
    coeffs = doc.get("coeffs", [])
    if not isinstance(coeffs, list):
        raise ParseError("coeffs must be a list")
    out = {}
    for item in coeffs:
        if not isinstance(item, list) or len(item) != 2:
            raise ParseError("series coefficients are [multi-index, polynomial] pairs")
        a = decode_exps(v.names, item[0])
        if a not in t.members:
            raise ParseError(f"index {item[0]} outside the truncation")
        if a in out:
            raise ParseError(f"repeated index {item[0]}")
        out[a] = decode_poly(ring, item[1])
    return Series(ring, v, t, out, check=False)


# -- tagged documents -----------------------------------------------------------


def encode(obj) -> dict:
    """The tagged document for a library value."""
    if isinstance(obj, Series):
        return {"type": "series", "ring": encode_ring(obj.ring), **encode_series_body(obj)}
    if isinstance(obj, SubstMap):
        return {
            "type": "subst",
            "ring": encode_ring(obj.ring),
            "src": {"vars": list(obj.src_vars.names), "trunc": encode_coideal(obj.src_trunc)},
            "dst": {"vars": list(obj.dst_vars.names), "trunc": encode_coideal(obj.dst_trunc)},
            "images": {n: _image_body(img) for n, img in zip(obj.src_vars.names, obj.images)},
        }
    if isinstance(obj, HSDeriv):
        return {
            "type": "hs",
            "ring": encode_ring(obj.ring),
            "vars": list(obj.vars.names),
            "trunc": encode_coideal(obj.trunc),
            "images": [_image_body(img) for img in obj.images],
        }
    if isinstance(obj, Poly):
        return {"type": "poly", "ring": encode_ring(obj.ring), "poly": encode_poly(obj)}
    if isinstance(obj, bool):
        return {"type": "bool", "value": obj}
    raise TypeError(f"no document encoding for {type(obj).__name__}")


def _image_body(f: Series) -> dict:
    return encode_series_body(f)


def encode_ell(value) -> dict:
    return {"type": "ell", "value": "inf" if value == math.inf else value}


def decode(doc, check: bool = True):
    """Inverse of ``encode``; ``check=False`` skips substitution-map validation."""
    _need_obj(doc, "document")
    kind = doc.get("type")
    if kind is None:
        raise ParseError("document has no type")
    if kind == "bool":
        if not isinstance(doc.get("value"), bool):
            raise ParseError("bool document needs a boolean value")
        return doc["value"]
    if "ring" not in doc:
        raise ParseError(f"{kind} document needs a ring header")
    ring = decode_ring(doc["ring"])
    if kind == "poly":
        return decode_poly(ring, doc.get("poly", []))
    if kind == "series":
        return decode_series_body(ring, doc)
    if kind == "subst":
        src = _decode_universe(doc.get("src"))
        dst = _decode_universe(doc.get("dst"))
        images = doc.get("images", {})
        _need_obj(images, "images")
        unknown = set(images) - set(src.vars.names)
        if unknown:
            raise ParseError(f"images for unknown variables {sorted(unknown)}")
        series = {n: decode_series_body(ring, body, dst.vars, dst) for n, body in images.items()}
        return SubstMap(ring, src, dst, series, check=check)
    if kind == "hs":
        vars = decode_varset(doc.get("vars"))
        trunc = decode_coideal(vars, doc.get("trunc"))
        images = doc.get("images")
        if isinstance(images, dict):
            unknown = set(images) - set(ring.gens)
            if unknown:
                raise ParseError(f"images for unknown generators {sorted(unknown)}")
            images = {g: decode_series_body(ring, b, vars, trunc) for g, b in images.items()}
        elif isinstance(images, list):
            if len(images) != ring.ngens:
                raise ParseError("one image per generator is required")
            images = [decode_series_body(ring, b, vars, trunc) for b in images]
        else:
            raise ParseError("images must be a list or an object")
        return HSDeriv(ring, trunc, images)
    raise ParseError(f"unknown document type {kind!r}")


def _decode_universe(doc) -> CoIdeal:
    _need_obj(doc, "universe")
    vars = decode_varset(doc.get("vars"))
    return decode_coideal(vars, doc.get("trunc"))


def _need_obj(doc, what):
    if not isinstance(doc, dict):
        raise ParseError(f"{what} must be a JSON object")


def dumps(doc, pretty: bool = False) -> str:
    if pretty:
        return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":")) + "\n"


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None


def render(obj) -> str:
    """Human-readable text for a value."""
    if isinstance(obj, SubstMap):
        lines = [f"{obj.src_trunc} -> {obj.dst_trunc}"]
        lines += [f"  {n} -> {img!r}" for n, img in zip(obj.src_vars.names, obj.images)]
        return "\n".join(lines)
    if isinstance(obj, HSDeriv):
        lines = [f"HS-derivation over {obj.trunc}"]
        lines += [f"  {g} -> {img!r}" for g, img in zip(obj.ring.gens, obj.images)]
        return "\n".join(lines)
    if obj == math.inf:
        return "inf"
    return repr(obj)

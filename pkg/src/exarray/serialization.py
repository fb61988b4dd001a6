"""JSON codecs for the file formats the CLI consumes and emits.

Set expressions are tagged trees, e.g. ``{"closed": [0.2, 0.8]}``,
``{"union": [...]}``, ``{"complement": {...}}``.  Representation specs are
``{"arity": n, "dissociated": b, "family": {"name": ..., ...}}`` or the same
with ``"expr"`` and ``"output"`` instead of ``"family"``.  Event hypergraphs
key constraints by comma-joined sorted vertex labels.  All loaders raise
`SchemaError` with a dotted path to the offending element.
"""

from __future__ import annotations

from typing import Any, Mapping

from . import measure as me
from . import representation as rep
from .errors import ExarrayError
from .events import EventHypergraph

SCHEMA_VERSION = 1


class SchemaError(ExarrayError, ValueError):
    pass


def _fail(path: str, msg: str):
    raise SchemaError(f"{path}: {msg}")


# ---------------------------------------------------------------------------
# Value spaces
# ---------------------------------------------------------------------------


def space_to_json(space: me.ValueSpace) -> Any:
    if isinstance(space, me.RealLine):
        return "real"
    if isinstance(space, me.UnitInterval):
        return "unit"
    if isinstance(space, me.Discrete):
        return {"discrete": space.size}
    raise SchemaError(f"unknown value space {space!r}")


def space_from_json(obj: Any, path: str = "space") -> me.ValueSpace:
    if obj == "real":
        return me.REAL_LINE
    if obj == "unit":
        return me.UNIT_INTERVAL
    if isinstance(obj, Mapping) and set(obj) == {"discrete"}:
        return me.Discrete(int(obj["discrete"]))
    _fail(path, f"expected 'real', 'unit' or {{'discrete': m}}, got {obj!r}")


# ---------------------------------------------------------------------------
# Set expressions
# ---------------------------------------------------------------------------


def set_to_json(expr: me.SetExpr) -> Any:
    if isinstance(expr, me._Full):
        return "full"
    if isinstance(expr, me._Empty):
        return "empty"
    if isinstance(expr, me.ClosedInterval):
        return {"closed": [expr.lo, expr.hi]}
    if isinstance(expr, me.OpenInterval):
        return {"open": [expr.lo, expr.hi]}
    if isinstance(expr, me.DiscreteSubset):
        return {"points": sorted(expr.points)}
    if isinstance(expr, me.Union):
        return {"union": [set_to_json(p) for p in expr.parts]}
    if isinstance(expr, me.Intersection):
        return {"intersection": [set_to_json(p) for p in expr.parts]}
    if isinstance(expr, me.Complement):
        return {"complement": set_to_json(expr.inner)}
    raise SchemaError(f"unknown set expression {expr!r}")


def set_from_json(obj: Any, path: str = "set") -> me.SetExpr:
    if obj == "full":
        return me.FULL
    if obj == "empty":
        return me.EMPTY
    if not isinstance(obj, Mapping) or len(obj) != 1:
        _fail(path, f"expected a single-key tag object or 'full'/'empty', got {obj!r}")
    tag, payload = next(iter(obj.items()))
    if tag == "closed":
        return me.ClosedInterval(float(payload[0]), float(payload[1]))
    if tag == "open":
        return me.OpenInterval(float(payload[0]), float(payload[1]))
    if tag == "points":
        return me.DiscreteSubset(int(p) for p in payload)
    if tag == "union":
        return me.Union(tuple(set_from_json(p, f"{path}.union[{i}]") for i, p in enumerate(payload)))
    if tag == "intersection":
        return me.Intersection(
            tuple(set_from_json(p, f"{path}.intersection[{i}]") for i, p in enumerate(payload))
        )
    if tag == "complement":
        return me.Complement(set_from_json(payload, f"{path}.complement"))
    _fail(path, f"unknown set tag {tag!r}")


# ---------------------------------------------------------------------------
# Reference distributions
# ---------------------------------------------------------------------------


def distribution_to_json(mu: me.ReferenceDistribution) -> Any:
    if isinstance(mu, me.UniformOnUnitInterval):
        return "uniform"
    if isinstance(mu, me.PiecewiseLinearCdf):
        return {"piecewise_cdf": [[x, f] for x, f in mu.knots]}
    if isinstance(mu, me.DiscretePmf):
        return {"pmf": list(mu.weights)}
    if isinstance(mu, me.EmpiricalSample):
        return {"empirical": list(mu.values)}
    raise SchemaError(f"unknown distribution {mu!r}")


def distribution_from_json(obj: Any, path: str = "distribution") -> me.ReferenceDistribution:
    if obj == "uniform":
        return me.UniformOnUnitInterval()
    if not isinstance(obj, Mapping) or len(obj) != 1:
        _fail(path, f"expected 'uniform' or a single-key tag object, got {obj!r}")
    tag, payload = next(iter(obj.items()))
    if tag == "piecewise_cdf":
        return me.PiecewiseLinearCdf(tuple((float(x), float(f)) for x, f in payload))
    if tag == "pmf":
        return me.DiscretePmf([float(w) for w in payload])
    if tag == "empirical":
        return me.EmpiricalSample([float(v) for v in payload])
    _fail(path, f"unknown distribution tag {tag!r}")


# ---------------------------------------------------------------------------
# Expression trees
# ---------------------------------------------------------------------------

_NARY = {"add": rep.Sum, "mul": rep.Prod, "min": rep.MinOf, "max": rep.MaxOf}
_NARY_NAMES = {rep.Sum: "add", rep.Prod: "mul", rep.MinOf: "min", rep.MaxOf: "max"}


def expr_to_json(expr: rep.Expr) -> Any:
    if isinstance(expr, rep.Xi):
        return {"xi": sorted(expr.sigma)}
    if isinstance(expr, rep.Const):
        return {"const": expr.value}
    if isinstance(expr, rep.Diff):
        return {"sub": [expr_to_json(expr.left), expr_to_json(expr.right)]}
    if isinstance(expr, rep.Less):
        return {"lt": [expr_to_json(expr.left), expr_to_json(expr.right)]}
    if isinstance(expr, rep.LessEq):
        return {"le": [expr_to_json(expr.left), expr_to_json(expr.right)]}
    if isinstance(expr, rep.StepTable):
        return {
            "step": {
                "arg": expr_to_json(expr.arg),
                "breaks": list(expr.breaks),
                "values": list(expr.values),
            }
        }
    if type(expr) in _NARY_NAMES:
        return {_NARY_NAMES[type(expr)]: [expr_to_json(a) for a in expr.args]}
    raise SchemaError(f"unknown expression node {expr!r}")


def expr_from_json(obj: Any, path: str = "expr") -> rep.Expr:
    if not isinstance(obj, Mapping) or len(obj) != 1:
        _fail(path, f"expected a single-key tag object, got {obj!r}")
    tag, payload = next(iter(obj.items()))
    if tag == "xi":
        return rep.Xi(int(p) for p in payload)
    if tag == "const":
        return rep.Const(float(payload))
    if tag == "sub":
        return rep.Diff(expr_from_json(payload[0], f"{path}.sub[0]"),
                        expr_from_json(payload[1], f"{path}.sub[1]"))
    if tag == "lt":
        return rep.Less(expr_from_json(payload[0], f"{path}.lt[0]"),
                        expr_from_json(payload[1], f"{path}.lt[1]"))
    if tag == "le":
        return rep.LessEq(expr_from_json(payload[0], f"{path}.le[0]"),
                          expr_from_json(payload[1], f"{path}.le[1]"))
    if tag == "step":
        return rep.StepTable(
            expr_from_json(payload["arg"], f"{path}.step.arg"),
            tuple(float(b) for b in payload["breaks"]),
            tuple(float(v) for v in payload["values"]),
        )
    if tag in _NARY:
        return _NARY[tag](
            tuple(expr_from_json(p, f"{path}.{tag}[{i}]") for i, p in enumerate(payload))
        )
    _fail(path, f"unknown expression tag {tag!r}")


# ---------------------------------------------------------------------------
# Representation specs
# ---------------------------------------------------------------------------


def rho_to_json(rho: rep.RhoSpec) -> dict:
    out: dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "arity": rho.arity,
        "dissociated": rho.dissociated,
    }
    body = rho.body
    if isinstance(body, rep.ConstantGraphon):
        out["family"] = {"name": "constant_graphon", "p": body.p}
    elif isinstance(body, rep.ProductGraphon):
        out["family"] = {"name": "product_graphon"}
    elif isinstance(body, rep.StepGraphon):
        out["family"] = {"name": "step_graphon", "matrix": [list(r) for r in body.matrix]}
    elif isinstance(body, rep.CoinMixture):
        out["family"] = {
            "name": "coin_mixture",
            "probs": list(body.probs),
            "weights": list(body.weights),
        }
    elif isinstance(body, rep.IdentityLatent):
        out["family"] = {"name": "identity_latent", "arity": body.arity}
    elif isinstance(body, rep.ExpressionBody):
        out["expr"] = expr_to_json(body.expr)
        out["output"] = space_to_json(rho.output)
    else:
        raise SchemaError(f"unknown body {body!r}")
    return out


def rho_from_json(obj: Any, path: str = "rho") -> rep.RhoSpec:
    if not isinstance(obj, Mapping):
        _fail(path, "expected an object")
    if "family" in obj:
        fam = obj["family"]
        name = fam.get("name")
        if name == "constant_graphon":
            return rep.constant_graphon(float(fam["p"]))
        if name == "product_graphon":
            return rep.product_graphon()
        if name == "step_graphon":
            return rep.step_graphon(fam["matrix"])
        if name == "coin_mixture":
            return rep.coin_mixture(fam["probs"], fam["weights"])
        if name == "identity_latent":
            return rep.identity_latent(int(fam.get("arity", 2)))
        _fail(f"{path}.family.name", f"unknown family {name!r}")
    if "expr" in obj:
        for key in ("arity", "dissociated", "output"):
            if key not in obj:
                _fail(path, f"expression specs need the {key!r} field")
        return rep.expression_rho(
            expr_from_json(obj["expr"], f"{path}.expr"),
            int(obj["arity"]),
            bool(obj["dissociated"]),
            space_from_json(obj["output"], f"{path}.output"),
        )
    _fail(path, "spec needs either a 'family' or an 'expr' field")


# ---------------------------------------------------------------------------
# Event hypergraphs
# ---------------------------------------------------------------------------


def event_to_json(event: EventHypergraph) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "vertices": list(event.vertices),
        "arity": event.arity,
        "space": space_to_json(event.space),
        "constraints": {
            ",".join(e): set_to_json(b) for e, b in sorted(event.constraints.items())
        },
    }


def event_from_json(obj: Any, path: str = "event") -> EventHypergraph:
    if not isinstance(obj, Mapping):
        _fail(path, "expected an object")
    for key in ("vertices", "arity", "space", "constraints"):
        if key not in obj:
            _fail(path, f"missing field {key!r}")
    constraints = {
        tuple(k.split(",")): set_from_json(v, f"{path}.constraints[{k!r}]")
        for k, v in obj["constraints"].items()
    }
    return EventHypergraph.build(
        [str(v) for v in obj["vertices"]],
        int(obj["arity"]),
        space_from_json(obj["space"], f"{path}.space"),
        constraints,
    )

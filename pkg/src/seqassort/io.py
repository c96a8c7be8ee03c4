"""JSON instance files, validated with pydantic."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from seqassort.choice import (
    Gam,
    GamAttraction,
    Lcf,
    LcfParams,
    Mnl,
    MnlAttraction,
    Rum,
    RumDistIndex,
)
from seqassort.errors import InvalidInstance
from seqassort.instance import (
    Atom,
    Cardinality,
    Instance,
    ItemDistribution,
    Knapsack,
    Unconstrained,
    ensure_valid,
)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class UtilityAtomDoc(_Strict):
    p: float
    u: float


class ModelDoc(_Strict):
    type: Literal["mnl", "gam", "rum", "lcf"]
    v0: Optional[float] = None
    shadow: Optional[list[float]] = None
    u0: Optional[float] = None
    families: Optional[list[list[list[UtilityAtomDoc]]]] = None

    @model_validator(mode="after")
    def _fields_for_type(self):
        need = {"mnl": (), "gam": ("v0", "shadow"), "rum": ("u0", "families"), "lcf": ()}[self.type]
        missing = [f for f in need if getattr(self, f) is None]
        if missing:
            raise ValueError(f"model type {self.type!r} requires {', '.join(missing)}")
        allowed = {"mnl": {"v0"}, "gam": {"v0", "shadow"}, "rum": {"u0", "families"}, "lcf": set()}
        extra = [
            f
            for f in ("v0", "shadow", "u0", "families")
            if getattr(self, f) is not None and f not in allowed[self.type]
        ]
        if extra:
            raise ValueError(f"model type {self.type!r} does not take {', '.join(extra)}")
        return self


class ConstraintDoc(_Strict):
    type: Literal["unconstrained", "cardinality", "knapsack"] = "unconstrained"
    k: Optional[int] = None
    B: Optional[float] = None

    @model_validator(mode="after")
    def _fields_for_type(self):
        if self.type == "cardinality" and self.k is None:
            raise ValueError("cardinality constraint requires k")
        if self.type == "knapsack" and self.B is None:
            raise ValueError("knapsack constraint requires B")
        return self


class LogAttractionDoc(_Strict):
    log_v: float


class LcfDoc(_Strict):
    fare: float
    q: float


class AtomDoc(_Strict):
    p: float
    r: float
    d: Union[int, float, LogAttractionDoc, LcfDoc]
    b: float = 0.0


class ItemDoc(_Strict):
    atoms: list[AtomDoc]


class InstanceDoc(_Strict):
    model: ModelDoc
    constraint: ConstraintDoc = ConstraintDoc()
    items: list[ItemDoc]


def _demand(kind: str, d, where: str):
    if kind == "mnl":
        if isinstance(d, LogAttractionDoc):
            v = math.exp(d.log_v) if d.log_v < 700 else math.inf
            return MnlAttraction(v, log_v=d.log_v)
        if isinstance(d, (int, float)):
            return MnlAttraction(float(d))
    elif kind == "gam" and isinstance(d, (int, float)):
        return GamAttraction(float(d))
    elif kind == "rum" and isinstance(d, (int, float)) and float(d).is_integer():
        return RumDistIndex(int(d))
    elif kind == "lcf" and isinstance(d, LcfDoc):
        return LcfParams(d.fare, d.q)
    raise InvalidInstance([f"{where}: demand {d!r} is not valid for model {kind}"])


def instance_from_doc(doc: InstanceDoc) -> Instance:
    m = doc.model
    if m.type == "mnl":
        model = Mnl(1.0 if m.v0 is None else m.v0)
    elif m.type == "gam":
        model = Gam(m.v0, tuple(m.shadow))
    elif m.type == "rum":
        model = Rum(
            m.u0, tuple(tuple(tuple((a.p, a.u) for a in dist) for dist in fam) for fam in m.families)
        )
    else:
        model = Lcf()
    c = doc.constraint
    constraint = {
        "unconstrained": lambda: Unconstrained(),
        "cardinality": lambda: Cardinality(c.k),
        "knapsack": lambda: Knapsack(c.B),
    }[c.type]()
    dists = tuple(
        ItemDistribution(
            tuple(
                Atom(a.p, a.r, _demand(m.type, a.d, f"item {i} atom {k}"), a.b)
                for k, a in enumerate(item.atoms)
            )
        )
        for i, item in enumerate(doc.items)
    )
    return ensure_valid(Instance(model, dists, constraint))


def parse_instance(data: dict) -> Instance:
    """Validate a decoded JSON document; all problems surface as InvalidInstance."""
    try:
        doc = InstanceDoc.model_validate(data)
    except ValidationError as exc:
        raise InvalidInstance(
            [f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in exc.errors()]
        ) from None
    return instance_from_doc(doc)


def load_instance(path: str | Path) -> Instance:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInstance([f"{path}: not valid JSON ({exc})"]) from None
    return parse_instance(data)


def _demand_json(d):
    if isinstance(d, MnlAttraction):
        return {"log_v": d.log_v} if d.log_v is not None else d.v
    if isinstance(d, GamAttraction):
        return d.v
    if isinstance(d, RumDistIndex):
        return d.l
    return {"fare": d.fare, "q": d.q}


def instance_to_dict(instance: Instance) -> dict:
    m = instance.model
    if isinstance(m, Mnl):
        model = {"type": "mnl", "v0": m.v0}
    elif isinstance(m, Gam):
        model = {"type": "gam", "v0": m.v0, "shadow": list(m.shadow)}
    elif isinstance(m, Rum):
        model = {
            "type": "rum",
            "u0": m.u0,
            "families": [[[{"p": p, "u": u} for p, u in dist] for dist in fam] for fam in m.families],
        }
    else:
        model = {"type": "lcf"}
    c = instance.constraint
    if isinstance(c, Cardinality):
        constraint = {"type": "cardinality", "k": c.k}
    elif isinstance(c, Knapsack):
        constraint = {"type": "knapsack", "B": c.B}
    else:
        constraint = {"type": "unconstrained"}
    items = [
        {
            "atoms": [
                {"p": a.prob, "r": a.revenue, "d": _demand_json(a.demand), "b": a.size}
                for a in d.atoms
            ]
        }
        for d in instance.distributions
    ]
    return {"model": model, "constraint": constraint, "items": items}


def dump_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=2, sort_keys=True) + "\n")

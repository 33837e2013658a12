"""JSON system files.

Layout::

    {
      "blocks": [1, 1, 1],
      "group": {"kind": "Z"} | {"kind": "Zd", "d": 2} | {"kind": "CyclicProduct", "orders": [3]},
      "generators": [{"permutation": [...], "unitaries": [matrix, ...]}, ...],
      "observables": {"name": [matrix, ...]},
      "states": {"name": [matrix, ...]},      optional
      "ideal": [block, ...]                   optional
    }

A matrix is a list of rows; an entry is ``[re, im]`` or a bare real number.
Serialization always writes ``[re, im]`` pairs with shortest round-trip
float formatting, so ``serialize(parse(serialize(s))) == serialize(s)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraShape, Element, State
from .dynamics import Automorphism, GroupAction, GroupPresentation

FORMAT_ERRORS = (KeyError, TypeError, IndexError, json.JSONDecodeError)


class SystemFormatError(ValueError):
    pass


@dataclass
class SystemFile:
    action: GroupAction
    observables: dict[str, Element] = field(default_factory=dict)
    states: dict[str, State] = field(default_factory=dict)
    ideal: tuple[int, ...] | None = None

    @property
    def shape(self) -> AlgebraShape:
        return self.action.shape


def _entry(z) -> complex:
    if isinstance(z, (int, float)) and not isinstance(z, bool):
        return complex(float(z), 0.0)
    if isinstance(z, list) and len(z) == 2 and all(isinstance(t, (int, float)) for t in z):
        return complex(float(z[0]), float(z[1]))
    raise SystemFormatError(f"matrix entry {z!r} is neither a number nor an [re, im] pair")


def _matrix(rows, n: int, what: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != n or any(not isinstance(r, list) or len(r) != n for r in rows):
        raise SystemFormatError(f"{what}: expected a {n}x{n} matrix")
    return np.array([[_entry(z) for z in r] for r in rows], dtype=complex)


def _blocks(data, shape: AlgebraShape, what: str) -> list[np.ndarray]:
    if not isinstance(data, list) or len(data) != shape.num_blocks:
        raise SystemFormatError(f"{what}: expected {shape.num_blocks} blocks")
    return [_matrix(m, n, f"{what}, block {i}") for i, (m, n) in enumerate(zip(data, shape.block_dims))]


def _presentation(g) -> GroupPresentation:
    kind = g["kind"]
    if kind == "Z":
        return GroupPresentation.Z()
    if kind == "Zd":
        return GroupPresentation.Zd(int(g["d"]))
    if kind == "CyclicProduct":
        return GroupPresentation.cyclic(*[int(m) for m in g["orders"]])
    raise SystemFormatError(f"unknown group kind {kind!r}")


def parse_system(text: str) -> SystemFile:
    try:
        doc = json.loads(text)
        shape = AlgebraShape(tuple(int(n) for n in doc["blocks"]))
        pres = _presentation(doc["group"])
        gens = []
        for j, g in enumerate(doc["generators"]):
            us = _blocks(g["unitaries"], shape, f"generator {j} unitaries")
            gens.append(Automorphism(shape, g["permutation"], us))
        action = GroupAction(pres, tuple(gens), shape)
        observables = {
            str(name): Element(shape, _blocks(b, shape, f"observable {name!r}"))
            for name, b in doc.get("observables", {}).items()
        }
        states = {
            str(name): State(shape, _blocks(b, shape, f"state {name!r}"))
            for name, b in doc.get("states", {}).items()
        }
        ideal = doc.get("ideal")
        ideal = None if ideal is None else tuple(int(i) for i in ideal)
    except FORMAT_ERRORS as exc:
        raise SystemFormatError(f"malformed system file: {exc!r}") from exc
    return SystemFile(action, observables, states, ideal)


def load_system(path) -> SystemFile:
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read())


def _dump_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def _dump_blocks(blocks) -> list:
    return [_dump_matrix(b) for b in blocks]


def system_to_dict(system: SystemFile) -> dict:
    pres = system.action.presentation
    group: dict = {"kind": pres.kind}
    if pres.kind == "Zd":
        group["d"] = pres.d
    elif pres.kind == "CyclicProduct":
        group["orders"] = list(pres.orders)
    doc = {
        "blocks": list(system.shape.block_dims),
        "group": group,
        "generators": [
            {"permutation": list(g.perm), "unitaries": _dump_blocks(g.unitaries)}
            for g in system.action.generators
        ],
        "observables": {k: _dump_blocks(v.blocks) for k, v in system.observables.items()},
    }
    if system.states:
        doc["states"] = {k: _dump_blocks(v.densities) for k, v in system.states.items()}
    if system.ideal is not None:
        doc["ideal"] = list(system.ideal)
    return doc


def serialize_system(system: SystemFile) -> str:
    return json.dumps(system_to_dict(system)) + "\n"

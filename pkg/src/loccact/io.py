"""JSON file formats for state sets, measurements, protocols and reports.

Complex numbers are ``[re, im]`` pairs. Output is key-sorted with a fixed
indent so identical inputs produce identical bytes; floats are written with
``repr`` and therefore round-trip exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from ._search import SearchBudget
from .classify import ActivationReport, Verdict
from .errors import SignatureError
from .measurements import LocalMeasurement, projector_measurement
from .protocols import Leaf, Node, ProtocolTree
from .states import FactorizationSpec, OrthogonalityReport, RedundancyReport, StateSet
from .tensor_core import DimensionSignature


def _c(z) -> list[float]:
    z = complex(z)
    return [z.real + 0.0, z.imag + 0.0]  # + 0.0 folds -0.0


def _z(pair) -> complex:
    re, im = pair
    return complex(float(re), float(im))


def plain(obj: Any) -> Any:
    """Convert numpy scalars, tuples and complex numbers to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) + 0.0
    if isinstance(obj, (complex, np.complexfloating)):
        return _c(obj)
    return obj


def dumps(doc: Any) -> str:
    return json.dumps(plain(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _read(path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# state sets


def state_set_to_dict(s: StateSet, factorization: FactorizationSpec | None = None) -> dict:
    doc = {
        "dims": list(s.sig.dims),
        "parties": list(s.sig.parties),
        "states": [{"label": st.label, "amplitudes": [_c(a) for a in st.amplitudes]} for st in s.states],
    }
    if s.name:
        doc["name"] = s.name
    if factorization is not None:
        doc["factorization"] = factorization.to_dict()
    return doc


def _factorization(doc) -> FactorizationSpec:
    if "splits" in doc:
        splits, names = doc["splits"], doc.get("names", {})
    else:
        splits, names = doc, {}
    return FactorizationSpec(
        {p: tuple(int(d) for d in v) for p, v in splits.items()},
        {p: tuple(str(n) for n in v) for p, v in names.items()},
    )


def state_set_from_dict(doc: dict) -> tuple[StateSet, FactorizationSpec | None]:
    try:
        sig = DimensionSignature(tuple(int(d) for d in doc["dims"]), tuple(doc["parties"]))
        vecs = [np.array([_z(p) for p in st["amplitudes"]]) for st in doc["states"]]
        labels = [st.get("label") for st in doc["states"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise SignatureError(f"malformed state-set document: {exc}") from exc
    if any(lab is None for lab in labels):
        labels = None
    s = StateSet.from_vectors(sig, vecs, labels, doc.get("name"))
    f = _factorization(doc["factorization"]) if doc.get("factorization") else None
    return s, f


def load_state_set(path) -> tuple[StateSet, FactorizationSpec | None]:
    return state_set_from_dict(_read(path))


# measurements


def measurement_to_dict(m: LocalMeasurement) -> dict:
    if m.index_sets is not None:
        outcomes = [{"label": lab, "index_set": list(ix)} for lab, ix in zip(m.outcome_labels, m.index_sets)]
    else:
        outcomes = [
            {"label": lab, "matrix": [[_c(x) for x in row] for row in M]}
            for lab, M in zip(m.outcome_labels, m.operators)
        ]
    return {"party": m.party, "local_dim": m.dim, "outcomes": outcomes}


def measurement_from_dict(doc: dict) -> LocalMeasurement:
    try:
        party, d, outs = doc["party"], int(doc["local_dim"]), doc["outcomes"]
        labels = [o["label"] for o in outs]
        if all("index_set" in o for o in outs):
            return projector_measurement(party, [o["index_set"] for o in outs], d, labels=labels)
        ops = [np.array([[_z(x) for x in row] for row in o["matrix"]]) for o in outs]
    except (KeyError, TypeError) as exc:
        raise SignatureError(f"malformed measurement document: {exc}") from exc
    for M in ops:
        if M.shape != (d, d):
            raise SignatureError(f"operator shape {M.shape} does not match local_dim {d}")
    return LocalMeasurement(party, tuple(ops), tuple(labels))


def load_measurement(path) -> LocalMeasurement:
    return measurement_from_dict(_read(path))


# protocols


def protocol_to_dict(tree: ProtocolTree) -> dict:
    if isinstance(tree, Leaf):
        return {"terminal": True} if tree.terminal else {"declare": tree.declare}
    return {"measurement": measurement_to_dict(tree.measurement), "children": [protocol_to_dict(c) for c in tree.children]}


def protocol_from_dict(doc: dict, base: Path | None = None) -> ProtocolTree:
    """Parse a tree; a string ``measurement`` is a path relative to ``base``."""
    if doc.get("terminal"):
        return Leaf()
    if "declare" in doc:
        return Leaf(str(doc["declare"]))
    m = doc["measurement"]
    if isinstance(m, str):
        m = _read((base or Path(".")) / m)
    return Node(measurement_from_dict(m), tuple(protocol_from_dict(c, base) for c in doc["children"]))


def load_protocol(path) -> ProtocolTree:
    return protocol_from_dict(_read(path), Path(path).parent)


# reports


def verdict_to_dict(v: Verdict, tolerance: float, budget: SearchBudget, seed: int) -> dict:
    return {
        "status": v.status.value,
        "certificate": [{"rule": r.rule, "detail": r.detail, "params": plain(r.params)} for r in v.rules],
        "protocol": protocol_to_dict(v.protocol) if v.protocol is not None else None,
        "evidence": plain(v.evidence) if v.evidence is not None else None,
        "tolerance": tolerance,
        "budget": budget.to_dict(),
        "seed": seed,
    }


def activation_to_dict(rep: ActivationReport, tolerance: float, budget: SearchBudget, seed: int) -> dict:
    branches = []
    for b in rep.branches:
        branches.append(
            {
                "outcome": b.outcome,
                "size": b.size,
                "verdict": verdict_to_dict(b.verdict, tolerance, budget, seed) if b.verdict is not None else None,
                "states": state_set_to_dict(b.states) if b.states is not None else None,
            }
        )
    return {
        "activating": rep.activating,
        "cardinality_preserved": rep.cardinality_preserved,
        "branches": branches,
        "tolerance": tolerance,
        "budget": budget.to_dict(),
        "seed": seed,
    }


def orthogonality_to_dict(rep: OrthogonalityReport, s: StateSet) -> dict:
    witness = None
    if rep.witness is not None:
        i, j, ov = rep.witness
        witness = {"pair": [s.labels[i], s.labels[j]], "overlap": _c(ov)}
    return {"orthogonal": rep.orthogonal, "max_overlap": rep.max_overlap, "witness": witness}


def redundancy_to_dict(rep: RedundancyReport) -> dict:
    return {
        "redundant": rep.redundant,
        "checked": rep.checked,
        "factors": list(rep.factor_names),
        "witnesses": [{"discard": list(w.discard), "kind": w.kind, "max_overlap": w.max_overlap} for w in rep.witnesses],
    }

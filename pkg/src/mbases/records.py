"""JSON records for instances and results.

Field scalars are written as strings ("3/4", "2"), systems as sorted
``[[index, count], ...]`` lists with 1-based indices.  Every record that
can be re-checked carries the instance it was computed on, so ``verify``
needs nothing else.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .equivalence import GoodDecomposition, LocalRelationWitness, WalkChain, verify_chain
from .exactlin import Field, span
from .packing import ViolationCertificate
from .systems import Configuration, ConfigurationError, Decomposition, System


class InstanceError(ValueError):
    pass


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _load_json(path) -> dict:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    if not isinstance(data, dict):
        raise InstanceError(f"{path}: top level must be an object")
    return data


def _need(data: dict, key: str, where: str):
    if key not in data:
        raise InstanceError(f"{where}: missing field {key!r}")
    return data[key]


# --------------------------------------------------------------------------
# systems and scalars


def system_to_json(T: System) -> list:
    return [[i, c] for i, c in T.items]


def system_from_json(obj, where: str = "system") -> System:
    """Accepts ``[[i, c], ...]`` or ``{"i": c}``; zero or negative counts are rejected."""
    pairs = obj.items() if isinstance(obj, dict) else obj
    counts = {}
    try:
        for i, c in pairs:
            i, c = int(i), int(c)
            if c <= 0:
                raise InstanceError(f"{where}: multiplicity of index {i} must be positive, got {c}")
            if i in counts:
                raise InstanceError(f"{where}: index {i} listed twice")
            counts[i] = c
    except (TypeError, ValueError) as e:
        if isinstance(e, InstanceError):
            raise
        raise InstanceError(f"{where}: expected index -> multiplicity pairs") from None
    return System.of(counts)


def scalar(x) -> str:
    return str(x)


def number(x):
    """Float/complex oracle output to JSON: exact values as strings, complex as [re, im]."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    return float(x)


# --------------------------------------------------------------------------
# instances


def instance_to_json(config: Configuration, T: System | None = None, l: int | None = None) -> dict:
    out = {
        "field": config.field.name,
        "k": config.k,
        "n": config.n,
        "m": config.m,
        "vectors": [[scalar(x) for x in v] for v in config.vectors],
    }
    if T is not None:
        out["system"] = {str(i): c for i, c in T.items}
    if l is not None:
        out["l"] = l
    return out


def instance_from_json(data: dict, where: str = "instance"):
    """(Configuration, System or None, l or None) from an instance mapping."""
    try:
        field = Field.parse(str(_need(data, "field", where)))
    except ValueError as e:
        raise InstanceError(f"{where}: field: {e}") from None
    k, n, m = (_need(data, key, where) for key in ("k", "n", "m"))
    vectors = _need(data, "vectors", where)
    if not isinstance(vectors, list) or len(vectors) != n:
        raise InstanceError(f"{where}: vectors: expected a list of n = {n} vectors")
    try:
        vecs = [[field(x) for x in v] for v in vectors]
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise InstanceError(f"{where}: vectors: {e}") from None
    try:
        config = Configuration(field, int(k), int(m), tuple(tuple(v) for v in vecs))
    except ConfigurationError as e:
        raise InstanceError(f"{where}: {e}") from None
    T = None
    if "system" in data:
        T = system_from_json(data["system"], f"{where}: system")
        try:
            config.check_system(T)
        except ConfigurationError as e:
            raise InstanceError(f"{where}: system: {e}") from None
    l = data.get("l")
    if l is not None and (not isinstance(l, int) or l < 0):
        raise InstanceError(f"{where}: l must be a non-negative integer")
    return config, T, l


def parse_instance(path):
    return instance_from_json(_load_json(path), str(path))


# --------------------------------------------------------------------------
# results


def decomposition_to_json(d: Decomposition) -> dict:
    return {"parts": [system_to_json(p) for p in d.parts], "tail": system_to_json(d.tail)}


def decomposition_from_json(obj) -> Decomposition:
    return Decomposition(tuple(system_from_json(p, "part") for p in obj["parts"]),
                         system_from_json(obj["tail"], "tail"))


def certificate_to_json(c: ViolationCertificate) -> dict:
    return {
        "system": system_to_json(c.system),
        "l": c.l,
        "support_subset": list(c.support_subset),
        "subspace_basis": [[scalar(x) for x in row] for row in c.subspace.rows],
        "dim": c.subspace.dim,
        "mu": c.mu_value,
        "bound": c.bound,
    }


def certificate_from_json(config: Configuration, obj) -> ViolationCertificate:
    subset = tuple(int(i) for i in obj["support_subset"])
    U = span([config.v(i) for i in subset], config.field, config.k)
    return ViolationCertificate(system_from_json(obj["system"]), int(obj["l"]), subset, U,
                                int(obj["mu"]), int(obj["bound"]))


def good_to_json(g: GoodDecomposition) -> dict:
    return {"T1": system_to_json(g.T1), "T2": system_to_json(g.T2), "witness": decomposition_to_json(g.witness)}


def good_from_json(obj) -> GoodDecomposition:
    return GoodDecomposition(system_from_json(obj["T1"], "T1"), system_from_json(obj["T2"], "T2"),
                             decomposition_from_json(obj["witness"]))


def chain_to_json(ch: WalkChain) -> dict:
    return {
        "members": [good_to_json(g) for g in ch.members],
        "links": [{"shared_parts": [system_to_json(p) for p in w.shared_parts],
                   "left_tail": system_to_json(w.left_tail),
                   "right_tail": system_to_json(w.right_tail)} for w in ch.witnesses],
        "distances": list(ch.distances),
    }


def chain_from_json(obj) -> WalkChain:
    members = [good_from_json(g) for g in obj["members"]]
    links = obj["links"]
    witnesses = [LocalRelationWitness(members[j], members[j + 1],
                                      tuple(system_from_json(p) for p in w["shared_parts"]),
                                      system_from_json(w["left_tail"]), system_from_json(w["right_tail"]))
                 for j, w in enumerate(links) if j + 1 < len(members)]
    return WalkChain(members, witnesses, list(obj.get("distances", [])))


def verify_record(record: dict) -> tuple[bool, str]:
    """Re-check an emitted record against the instance it carries."""
    kind = _need(record, "kind", "record")
    config, T, l = instance_from_json(_need(record, "instance", "record"), "record.instance")
    if kind == "decomposition":
        d = decomposition_from_json(record["decomposition"])
        probs = d.problems(config, T)
        if l is not None and len(d.tail) != l:
            probs.append(f"tail has size {len(d.tail)}, expected {l}")
    elif kind == "certificate":
        c = certificate_from_json(config, record["certificate"])
        probs = c.problems(config)
        if T is not None and c.system != T:
            probs.append("certificate is about a different system")
    elif kind == "good":
        g = good_from_json(record["good"])
        probs = g.problems(config)
        if T is not None and g.total != T:
            probs.append(f"T1 + T2 = {g.total}, not {T}")
    elif kind == "a1":
        probs = []
        for entry in record["a1"]:
            d = decomposition_from_json(entry["witness"])
            probs += d.problems(config, T)
            if d.tail != System.of([entry["index"]]):
                probs.append(f"witness for {entry['index']} has tail {d.tail}")
    elif kind == "chain":
        ok, why = verify_chain(config, chain_from_json(record["chain"]))
        probs = [] if ok else [why]
        if ok and T is not None and record["chain"]["members"]:
            if chain_from_json(record["chain"]).members[0].total != T:
                probs.append("chain decomposes a different system")
    else:
        raise InstanceError(f"record kind {kind!r} cannot be verified")
    return (not probs), ("ok" if not probs else probs[0])


# --------------------------------------------------------------------------
# arrangements


def parse_arrangement(path):
    """(ArrangementModel, basepoint) from an arrangement file."""
    from .arrangement import ArrangementModel

    data = _load_json(path)
    where = str(path)

    def num(x):
        if isinstance(x, list) and len(x) == 2:
            return complex(float(x[0]), float(x[1]))
        return float(Fraction(x)) if isinstance(x, str) else float(x)

    try:
        B = [[num(x) for x in row] for row in _need(data, "B", where)]
        weights = [num(x) for x in _need(data, "weights", where)]
        opts = {key: float(data[key]) for key in ("fd_step", "grad_tol", "sep_tol") if key in data}
        if "seed" in data:
            opts["seed"] = int(data["seed"])
        model = ArrangementModel(np.array(B), np.array(weights), **opts)
        base = data.get("basepoint")
        base = None if base is None else np.array([num(x) for x in base])
    except (TypeError, ValueError) as e:
        raise InstanceError(f"{where}: {e}") from None
    if base is not None and base.shape != (model.n,):
        raise InstanceError(f"{where}: basepoint must have n = {model.n} entries")
    return model, base


def load_json(path) -> dict:
    return _load_json(path)

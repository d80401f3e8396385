"""Positional result files and model enrichment.

A result vector holds one boolean per cell, in the order the cells are
defined in the model file.
"""

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import EnrichError, ResultsError
from .model import PolyhedralModelFile, SimplexRecord, model_digest
from .utils import read_bytes, write_bytes

ENRICH_MODES = ("replace", "append")


@dataclass
class ResultEntry:
    name: str
    values: np.ndarray


@dataclass
class ResultFile:
    entries: list = field(default_factory=list)
    cell_count: int = 0
    model_digest: str = None

    @classmethod
    def from_report(cls, report):
        return cls([ResultEntry(label, vector) for label, vector in report.items()],
                   report.cell_count, report.model_digest)

    @property
    def names(self):
        return [e.name for e in self.entries]

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, name):
        for entry in self.entries:
            if entry.name == name:
                return entry.values
        raise ResultsError(f"no result named '{name}' (available: {', '.join(self.names) or 'none'})")


def write_results(results):
    """Serialise a ResultFile (or a CheckReport) to JSON bytes."""
    if not isinstance(results, ResultFile):
        results = ResultFile.from_report(results)
    doc = {
        "cellCount": results.cell_count,
        "modelDigest": results.model_digest,
        "results": [{"name": e.name, "values": [bool(v) for v in e.values]} for e in results.entries],
    }
    return json.dumps(doc).encode("utf-8")


def read_results(data, model=None):
    """Parse a result file; with a model, lengths and digest are checked against it."""
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ResultsError(f"malformed result file: {e}") from e
    if not isinstance(doc, dict) or not isinstance(doc.get("results"), list):
        raise ResultsError("result file must be an object with a 'results' array")

    expected = model.cell_count if model is not None else doc.get("cellCount")
    if model is not None and doc.get("cellCount") not in (None, expected):
        raise ResultsError(f"result file is for {doc['cellCount']} cells, the model has {expected}")
    digest = doc.get("modelDigest")
    if model is not None and digest is not None and digest != model_digest(model):
        raise ResultsError("result file was computed on a structurally different model")

    entries = []
    seen = set()
    for i, raw in enumerate(doc["results"]):
        if not isinstance(raw, dict) or not isinstance(raw.get("name"), str) or not isinstance(raw.get("values"), list):
            raise ResultsError(f"results[{i}] must have a string 'name' and a 'values' array")
        name = raw["name"]
        if name in seen:
            raise ResultsError(f"duplicate result name '{name}'")
        seen.add(name)
        if not all(isinstance(v, bool) for v in raw["values"]):
            raise ResultsError(f"result '{name}': values must be booleans")
        if expected is None:
            expected = len(raw["values"])
        elif len(raw["values"]) != expected:
            raise ResultsError(f"result '{name}' has {len(raw['values'])} values, expected {expected}")
        entries.append(ResultEntry(name, np.array(raw["values"], dtype=bool)))
    cell_count = expected if expected is not None else 0
    return ResultFile(entries, cell_count, digest)


def save_results(path, results):
    write_bytes(path, write_results(results))


def load_results(path, model=None):
    logging.info(f"Loading results from {path}")
    return read_results(read_bytes(path), model)


@dataclass
class EnrichSpec:
    injections: list  # (result name, atom name) pairs
    mode: str = "replace"

    def __post_init__(self):
        if self.mode not in ENRICH_MODES:
            raise EnrichError(f"enrich mode must be one of {', '.join(ENRICH_MODES)}, got '{self.mode}'")
        atoms = [atom for _, atom in self.injections]
        if len(set(atoms)) != len(atoms):
            raise EnrichError(f"injected atom names must be distinct: {', '.join(atoms)}")

    @classmethod
    def parse(cls, items, mode="replace"):
        """Build from `RESULT=ATOM` strings; `RESULT` alone keeps the result name."""
        injections = []
        for item in items:
            result, sep, atom = item.rpartition("=")
            if not sep:
                result, atom = item, item
            if not result or not atom:
                raise EnrichError(f"bad injection '{item}', expected RESULT=ATOM")
            injections.append((result, atom))
        return cls(injections, mode)


def enrich_model(model, results, spec):
    """New model whose atoms carry the injected result vectors."""
    vectors = []
    for result_name, atom in spec.injections:
        vector = np.asarray(results[result_name], dtype=bool)
        if len(vector) != model.cell_count:
            raise EnrichError(f"result '{result_name}' has {len(vector)} values, the model has {model.cell_count} cells")
        vectors.append((atom, vector))

    if spec.mode == "replace":
        atom_names = [atom for atom, _ in vectors]
        keep_existing = False
    else:
        collisions = [atom for atom, _ in vectors if atom in model.atom_names]
        if collisions:
            raise EnrichError(f"atom(s) already in the model: {', '.join(collisions)}")
        atom_names = list(model.atom_names) + [atom for atom, _ in vectors]
        keep_existing = True

    simplexes = [
        SimplexRecord(s.id, list(s.points), (list(s.atoms) if keep_existing else []) + [atom for atom, v in vectors if v[i]])
        for i, s in enumerate(model.simplexes)
    ]
    logging.info(f"Enriched model ({spec.mode}): injected {', '.join(a for a, _ in vectors) or 'nothing'}")
    return PolyhedralModelFile(atom_names, model.number_of_points,
                               [list(xyz) for xyz in model.coordinates_of_points], simplexes)

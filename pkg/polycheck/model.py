"""Polyhedral model files and the cell poset every check runs on.

A model file lists simplexes (points, segments, triangles, tetrahedra) by
vertex index, each tagged with atomic propositions. Cell index == position of
the simplex record in the file; result files rely on that ordering.
"""

import json
import logging
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import ModelFormatError, ModelValidationError, SatSizeError, UnknownAtomError
from .utils import calculate_checksum, read_bytes, write_bytes

MAX_SIMPLEX_POINTS = 4
AFFINE_TOLERANCE = 1e-9


@dataclass
class SimplexRecord:
    id: str
    points: list
    atoms: list = field(default_factory=list)

    @property
    def dimension(self):
        return len(self.points) - 1


@dataclass
class PolyhedralModelFile:
    atom_names: list
    number_of_points: int
    coordinates_of_points: list
    simplexes: list

    @property
    def cell_count(self):
        return len(self.simplexes)


@dataclass(frozen=True)
class Violation:
    kind: str  # missing-face | duplicate-vertex-set | duplicate-id | unknown-atom | bad-index | non-affine
    ids: tuple
    detail: str = ""


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def of_kind(self, kind):
        return [v for v in self.violations if v.kind == kind]

    def add(self, kind, ids, detail=""):
        self.violations.append(Violation(kind, tuple(ids), detail))


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _expect(condition, message, path):
    if not condition:
        raise ModelFormatError(message, path)


def parse_model(data):
    """Parse model JSON text (bytes or str) into a PolyhedralModelFile."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ModelFormatError(f"not UTF-8 text: {e}") from e
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from e

    _expect(isinstance(doc, dict), "top level must be an object", "$")
    for key in ("atomNames", "numberOfPoints", "coordinatesOfPoints", "simplexes"):
        _expect(key in doc, f"missing field '{key}'", "$")

    atom_names = doc["atomNames"]
    _expect(isinstance(atom_names, list), "must be an array", "$.atomNames")
    for i, name in enumerate(atom_names):
        _expect(isinstance(name, str), "must be a string", f"$.atomNames[{i}]")
    _expect(len(set(atom_names)) == len(atom_names), "atom names must be distinct", "$.atomNames")

    n_points = doc["numberOfPoints"]
    _expect(isinstance(n_points, int) and not isinstance(n_points, bool) and n_points >= 0,
            "must be a non-negative integer", "$.numberOfPoints")

    coords = doc["coordinatesOfPoints"]
    _expect(isinstance(coords, list), "must be an array", "$.coordinatesOfPoints")
    _expect(len(coords) == n_points,
            f"has {len(coords)} entries but numberOfPoints is {n_points}", "$.coordinatesOfPoints")
    for i, xyz in enumerate(coords):
        path = f"$.coordinatesOfPoints[{i}]"
        _expect(isinstance(xyz, list) and len(xyz) == 3, "must be an [x, y, z] triple", path)
        _expect(all(_is_number(c) for c in xyz), "coordinates must be numbers", path)

    raw_simplexes = doc["simplexes"]
    _expect(isinstance(raw_simplexes, list), "must be an array", "$.simplexes")
    simplexes = []
    for i, raw in enumerate(raw_simplexes):
        path = f"$.simplexes[{i}]"
        _expect(isinstance(raw, dict), "must be an object", path)
        for key in ("id", "points", "atoms"):
            _expect(key in raw, f"missing field '{key}'", path)
        _expect(isinstance(raw["id"], str), "must be a string", f"{path}.id")
        points = raw["points"]
        _expect(isinstance(points, list), "must be an array", f"{path}.points")
        _expect(1 <= len(points) <= MAX_SIMPLEX_POINTS,
                f"a simplex has 1 to {MAX_SIMPLEX_POINTS} points, got {len(points)}", f"{path}.points")
        for j, p in enumerate(points):
            _expect(isinstance(p, int) and not isinstance(p, bool), "must be an integer", f"{path}.points[{j}]")
            _expect(0 <= p < n_points, f"bad-index: vertex {p} outside [0, {n_points})", f"{path}.points[{j}]")
        _expect(len(set(points)) == len(points), "duplicate vertex in simplex", f"{path}.points")
        atoms = raw["atoms"]
        _expect(isinstance(atoms, list), "must be an array", f"{path}.atoms")
        for j, a in enumerate(atoms):
            _expect(isinstance(a, str), "must be a string", f"{path}.atoms[{j}]")
        simplexes.append(SimplexRecord(raw["id"], list(points), list(atoms)))

    return PolyhedralModelFile(list(atom_names), n_points, [list(xyz) for xyz in coords], simplexes)


def write_model(model):
    """Serialise a model with the converter's 2-space indentation."""
    doc = {
        "atomNames": list(model.atom_names),
        "numberOfPoints": model.number_of_points,
        "coordinatesOfPoints": [list(xyz) for xyz in model.coordinates_of_points],
        "simplexes": [{"id": s.id, "points": list(s.points), "atoms": list(s.atoms)} for s in model.simplexes],
    }
    return json.dumps(doc, indent=2).encode("utf-8")


def read_model(path):
    logging.info(f"Loading model from {path}")
    return parse_model(read_bytes(path))


def save_model(path, model):
    write_bytes(path, write_model(model))


def model_digest(model):
    """SHA-256 over the combinatorial structure only (atoms and coordinates excluded)."""
    shape = [model.number_of_points, [[s.id, list(s.points)] for s in model.simplexes]]
    return calculate_checksum(json.dumps(shape, separators=(",", ":")).encode("utf-8"))


def validate_complex(model, geometric=False):
    """Check the simplicial complex conditions; returns every finding."""
    report = ValidationReport()
    declared = set(model.atom_names)
    seen_ids = {}
    by_vertices = {}

    for s in model.simplexes:
        unknown = [a for a in s.atoms if a not in declared]
        if unknown:
            report.add("unknown-atom", [s.id], f"undeclared atom(s) {', '.join(unknown)}")
        bad = [p for p in s.points if not 0 <= p < model.number_of_points]
        if bad or len(set(s.points)) != len(s.points) or not 1 <= len(s.points) <= MAX_SIMPLEX_POINTS:
            report.add("bad-index", [s.id], f"points {s.points}")
            continue
        if s.id in seen_ids:
            report.add("duplicate-id", [seen_ids[s.id], s.id], f"id '{s.id}' used twice")
        else:
            seen_ids[s.id] = s.id
        key = tuple(sorted(s.points))
        if key in by_vertices:
            report.add("duplicate-vertex-set", [by_vertices[key], s.id], f"vertices {list(key)}")
        else:
            by_vertices[key] = s.id

    # Every proper face must be present, checked on vertex subsets.
    for key, sid in by_vertices.items():
        missing = [
            list(sub)
            for k in range(1, len(key))
            for sub in combinations(key, k)
            if sub not in by_vertices
        ]
        if missing:
            report.add("missing-face", [sid], f"missing faces {missing}")

    if geometric and by_vertices:
        _check_affine(model, by_vertices, report)

    logging.debug(f"Validation found {len(report.violations)} violation(s)")
    return report


def _check_affine(model, by_vertices, report):
    coords = np.asarray(model.coordinates_of_points, dtype=float)
    coords = coords - coords.min(axis=0)
    extent = coords.max()
    if extent > 0:
        coords = coords / extent
    for key, sid in by_vertices.items():
        if len(key) < 2:
            continue
        base = coords[key[0]]
        spans = coords[list(key[1:])] - base
        if np.linalg.matrix_rank(spans, tol=AFFINE_TOLERANCE) < len(key) - 1:
            report.add("non-affine", [sid], f"points {list(key)} are affinely dependent")


class KripkeFrame:
    """Finite reflexive frame: cells plus strict relation pairs lower R upper.

    Reflexive pairs are implicit. On a transitive order one relational step
    gives both closures.
    """

    def __init__(self, cell_count, lower, upper, atom_sat):
        self.cell_count = int(cell_count)
        self.lower = np.asarray(lower, dtype=np.int64)
        self.upper = np.asarray(upper, dtype=np.int64)
        self.atom_sat = atom_sat
        for vector in self.atom_sat.values():
            vector.flags.writeable = False

    @property
    def atom_names(self):
        return list(self.atom_sat)

    def check_size(self, s):
        s = np.asarray(s, dtype=bool)
        if s.shape != (self.cell_count,):
            raise SatSizeError(f"expected a vector of {self.cell_count} cells, got shape {s.shape}")
        return s

    def empty(self):
        return np.zeros(self.cell_count, dtype=bool)

    def full(self):
        return np.ones(self.cell_count, dtype=bool)

    def atom(self, name):
        try:
            return self.atom_sat[name]
        except KeyError:
            raise UnknownAtomError(name, self.atom_names) from None

    def down_set(self, s):
        """Cells below some member of s (s included)."""
        s = self.check_size(s)
        out = s.copy()
        out[self.lower[s[self.upper]]] = True
        return out

    def up_set(self, s):
        """Cells above some member of s (s included)."""
        s = self.check_size(s)
        out = s.copy()
        out[self.upper[s[self.lower]]] = True
        return out


class CellPoset(KripkeFrame):
    """Cell poset of a simplicial complex; the relation holds every strict face pair."""

    def __init__(self, ids, vertex_sets, lower, upper, cover_lower, cover_upper, atom_sat):
        super().__init__(len(ids), lower, upper, atom_sat)
        self.ids = ids
        self.vertex_sets = vertex_sets
        self.dimension = np.array([len(v) - 1 for v in vertex_sets], dtype=np.int8)
        self.cover_lower = np.asarray(cover_lower, dtype=np.int64)
        self.cover_upper = np.asarray(cover_upper, dtype=np.int64)
        self._index_of = {cid: i for i, cid in enumerate(ids)}
        self._up_ptr, self._up_idx = _csr(self.cover_lower, self.cover_upper, self.cell_count)
        self._down_ptr, self._down_idx = _csr(self.cover_upper, self.cover_lower, self.cell_count)

    @property
    def covering_pair_count(self):
        return len(self.cover_lower)

    def index_of(self, cell_id):
        return self._index_of[cell_id]

    def covering_up(self, i):
        return self._up_idx[self._up_ptr[i]:self._up_ptr[i + 1]].tolist()

    def covering_down(self, i):
        return self._down_idx[self._down_ptr[i]:self._down_ptr[i + 1]].tolist()

    def leq(self, a, b):
        return set(self.vertex_sets[a]) <= set(self.vertex_sets[b])

    def cells_of(self, s):
        """Ids of the cells set in s, in cell order."""
        return [self.ids[i] for i in np.flatnonzero(self.check_size(s))]

    def vector_of(self, cell_ids):
        out = self.empty()
        out[[self._index_of[c] for c in cell_ids]] = True
        return out


def _csr(src, dst, n):
    order = np.argsort(src, kind="stable")
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(ptr, src + 1, 1)
    return np.cumsum(ptr), dst[order]


def build_poset(model):
    """Build the cell poset; the model must validate cleanly."""
    report = validate_complex(model)
    if not report.ok:
        logging.error(f"Model rejected with {len(report.violations)} violation(s)")
        raise ModelValidationError(report)

    vertex_sets = [tuple(sorted(s.points)) for s in model.simplexes]
    index = {key: i for i, key in enumerate(vertex_sets)}
    lower, upper, cover_lower, cover_upper = [], [], [], []
    for i, key in enumerate(vertex_sets):
        for k in range(1, len(key)):
            for sub in combinations(key, k):
                j = index[sub]
                lower.append(j)
                upper.append(i)
                if k == len(key) - 1:
                    cover_lower.append(j)
                    cover_upper.append(i)

    n = len(vertex_sets)
    atom_sat = {name: np.zeros(n, dtype=bool) for name in model.atom_names}
    for i, s in enumerate(model.simplexes):
        for a in s.atoms:
            atom_sat[a][i] = True

    poset = CellPoset([s.id for s in model.simplexes], vertex_sets, lower, upper,
                      cover_lower, cover_upper, atom_sat)
    logging.info(f"Cell poset built: {n} cells, {poset.covering_pair_count} covering pairs, "
                 f"{len(lower)} face pairs")
    return poset


def down_set(poset, s):
    return poset.down_set(s)


def up_set(poset, s):
    return poset.up_set(s)

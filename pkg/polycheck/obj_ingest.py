"""Wavefront .obj/.mtl ingestion.

Produces a model whose cells are all mesh vertices (P*), then the edges
derived from the triangle sides (E*), then the triangles (T*). Atomic
propositions come from colour rules: vertex rules test the vertex colour,
face rules the diffuse colour of the material active when the face was
declared.
"""

import logging
import os
from dataclasses import dataclass, field

from .errors import ConvertConfigError, ObjFormatError
from .model import PolyhedralModelFile, SimplexRecord
from .utils import load_yaml_file, read_bytes

DEFAULT_OBJECT_SCALE = 50.0
DEFAULT_TOLERANCE = 10
SCOPES = ("vertex", "face", "edge")


def float_color_to_8bit(value):
    # Python's round() is round-half-to-even: 0.5 -> 128
    return int(round(float(value) * 255))


@dataclass
class Material:
    name: str
    ambient: tuple = None
    diffuse: tuple = None
    specular: tuple = None


@dataclass
class ObjMesh:
    vertices: list = field(default_factory=list)
    vertex_colors: list = field(default_factory=list)  # rgb triple or None per vertex
    faces: list = field(default_factory=list)
    face_colors: list = field(default_factory=list)
    mtllibs: list = field(default_factory=list)


@dataclass
class AtomMappingRule:
    scope: str
    color: tuple = None
    tolerance: int = DEFAULT_TOLERANCE
    atoms: list = field(default_factory=list)
    fallback_atoms: list = field(default_factory=list)

    def __post_init__(self):
        if self.scope not in SCOPES:
            raise ConvertConfigError(f"rule scope must be one of {', '.join(SCOPES)}, got '{self.scope}'")
        if not isinstance(self.tolerance, int) or self.tolerance < 0:
            raise ConvertConfigError(f"rule tolerance must be a non-negative integer, got {self.tolerance!r}")
        if self.color is not None:
            if len(self.color) != 3 or not all(isinstance(c, int) and 0 <= c <= 255 for c in self.color):
                raise ConvertConfigError(f"rule colour must be three integers in [0, 255], got {self.color!r}")
            self.color = tuple(self.color)
        if self.scope == "edge" and (self.color is not None or self.atoms):
            raise ConvertConfigError("edge rules can only carry fallback_atoms; edges have no colour")
        if self.atoms and self.color is None:
            raise ConvertConfigError("a rule with atoms needs a colour to match")

    def matches(self, rgb):
        if self.color is None or rgb is None:
            return False
        return all(abs(a - b) <= self.tolerance for a, b in zip(rgb, self.color))


@dataclass
class ConvertConfig:
    object_scale: float = DEFAULT_OBJECT_SCALE
    rules: list = field(default_factory=list)
    declared_atoms: list = None

    def atom_names(self):
        if self.declared_atoms is not None:
            return list(self.declared_atoms)
        names = []
        for rule in self.rules:
            for atom in rule.atoms + rule.fallback_atoms:
                if atom not in names:
                    names.append(atom)
        return names

    def check(self):
        declared = set(self.atom_names())
        for i, rule in enumerate(self.rules):
            undeclared = [a for a in rule.atoms + rule.fallback_atoms if a not in declared]
            if undeclared:
                raise ConvertConfigError(f"rule {i} emits undeclared atom(s) {', '.join(undeclared)}")


def _numbers(tokens, lineno, source, count):
    try:
        return [float(t) for t in tokens[:count]]
    except ValueError:
        raise ObjFormatError(f"malformed number in '{' '.join(tokens)}'", lineno, source) from None


def parse_mtl(text, source="mtl"):
    """Material name -> Material with 8-bit Ka/Kd/Ks colours."""
    materials = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        key = tokens[0]
        if key == "newmtl":
            if len(tokens) < 2:
                raise ObjFormatError("newmtl without a name", lineno, source)
            current = Material(tokens[1])
            if current.name in materials:
                logging.warning(f"{source}:{lineno}: material '{current.name}' redefined")
            materials[current.name] = current
        elif key in ("Ka", "Kd", "Ks"):
            if current is None:
                raise ObjFormatError(f"{key} before any newmtl", lineno, source)
            if len(tokens) < 4:
                raise ObjFormatError(f"{key} needs three components", lineno, source)
            rgb = tuple(float_color_to_8bit(v) for v in _numbers(tokens[1:], lineno, source, 3))
            setattr(current, {"Ka": "ambient", "Kd": "diffuse", "Ks": "specular"}[key], rgb)
    logging.debug(f"Parsed {len(materials)} material(s) from {source}")
    return materials


def _vertex_index(token, vertex_count, lineno, source):
    head = token.split("/")[0]
    try:
        index = int(head) - 1
    except ValueError:
        raise ObjFormatError(f"malformed face vertex '{token}'", lineno, source) from None
    if not 0 <= index < vertex_count:
        raise ObjFormatError(f"face vertex {head} outside 1..{vertex_count}", lineno, source)
    return index


def parse_obj(text, materials=None, source="obj", load_materials=None):
    """Parse the triangle subset of .obj: v, f, usemtl, mtllib.

    With load_materials, each `mtllib` name is passed to it and the returned
    materials are added; materials already known keep their first definition.
    """
    materials = dict(materials or {})
    mesh = ObjMesh()
    current_color = (0, 0, 0)
    pending_faces = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        key = tokens[0]
        if key == "v":
            if len(tokens) < 4:
                raise ObjFormatError("vertex needs x y z", lineno, source)
            mesh.vertices.append(tuple(_numbers(tokens[1:], lineno, source, 3)))
            if len(tokens) == 7:
                rgb = tuple(float_color_to_8bit(v) for v in _numbers(tokens[4:], lineno, source, 3))
                mesh.vertex_colors.append(rgb)
            else:
                mesh.vertex_colors.append(None)
        elif key == "f":
            if len(tokens) != 4:
                raise ObjFormatError(f"non-triangular face with {len(tokens) - 1} vertices", lineno, source)
            pending_faces.append((tokens[1:], current_color, lineno))
        elif key == "usemtl":
            name = tokens[1] if len(tokens) > 1 else ""
            if name not in materials:
                raise ObjFormatError(f"unknown material '{name}'", lineno, source)
            if materials[name].diffuse is None:
                raise ObjFormatError(f"material '{name}' has no Kd colour", lineno, source)
            current_color = materials[name].diffuse
        elif key == "mtllib":
            mesh.mtllibs.extend(tokens[1:])
            if load_materials is not None:
                for name in tokens[1:]:
                    for material_name, material in load_materials(name).items():
                        materials.setdefault(material_name, material)

    # Faces may reference vertices declared further down the file.
    for corner_tokens, rgb, lineno in pending_faces:
        face = tuple(_vertex_index(t, len(mesh.vertices), lineno, source) for t in corner_tokens)
        if len(set(face)) != 3:
            raise ObjFormatError(f"degenerate face {[i + 1 for i in face]}", lineno, source)
        mesh.faces.append(face)
        mesh.face_colors.append(rgb)
    logging.info(f"Parsed {source}: {len(mesh.vertices)} vertices, {len(mesh.faces)} faces")
    return mesh


def derive_edges(faces):
    """Distinct triangle sides, smaller index first, in first-occurrence order."""
    edges = {}
    for face in faces:
        for i, j in ((0, 1), (1, 2), (2, 0)):
            a, b = face[i], face[j]
            edge = (a, b) if a < b else (b, a)
            edges.setdefault(edge, None)
    return list(edges)


def _atoms_for(rules, rgb):
    for rule in rules:
        if rule.matches(rgb):
            return list(rule.atoms)
    for rule in rules:
        if rule.fallback_atoms:
            return list(rule.fallback_atoms)
    return []


def convert(mesh, cfg):
    cfg.check()
    by_scope = {scope: [r for r in cfg.rules if r.scope == scope] for scope in SCOPES}
    scale = cfg.object_scale

    simplexes = []
    for i, rgb in enumerate(mesh.vertex_colors):
        simplexes.append(SimplexRecord(f"P{i}", [i], _atoms_for(by_scope["vertex"], rgb)))
    edges = derive_edges(mesh.faces)
    for i, (a, b) in enumerate(edges):
        simplexes.append(SimplexRecord(f"E{i}", [a, b], _atoms_for(by_scope["edge"], None)))
    for i, (face, rgb) in enumerate(zip(mesh.faces, mesh.face_colors)):
        simplexes.append(SimplexRecord(f"T{i}", list(face), _atoms_for(by_scope["face"], rgb)))

    coordinates = [[x * scale, y * scale, z * scale] for x, y, z in mesh.vertices]
    logging.info(f"Converted mesh: {len(mesh.vertices)} points, {len(edges)} edges, "
                 f"{len(mesh.faces)} triangles")
    return PolyhedralModelFile(cfg.atom_names(), len(mesh.vertices), coordinates, simplexes)


def load_rules(path, default_tolerance=DEFAULT_TOLERANCE, object_scale=DEFAULT_OBJECT_SCALE):
    """Read a ConvertConfig from a YAML or JSON rule file."""
    doc = load_yaml_file(path) or {}
    if not isinstance(doc, dict):
        raise ConvertConfigError(f"{path}: top level must be a mapping")
    rules = []
    for i, raw in enumerate(doc.get("rules", [])):
        if not isinstance(raw, dict):
            raise ConvertConfigError(f"{path}: rule {i} must be a mapping")
        unknown = set(raw) - {"scope", "color", "tolerance", "atoms", "fallback_atoms"}
        if unknown:
            raise ConvertConfigError(f"{path}: rule {i} has unknown key(s) {', '.join(sorted(unknown))}")
        try:
            rules.append(AtomMappingRule(
                scope=raw.get("scope", "vertex"),
                color=raw.get("color"),
                tolerance=raw.get("tolerance", default_tolerance),
                atoms=list(raw.get("atoms", [])),
                fallback_atoms=list(raw.get("fallback_atoms", [])),
            ))
        except ConvertConfigError as e:
            raise ConvertConfigError(f"{path}: rule {i}: {e}") from None
    declared = doc.get("declared_atoms")
    cfg = ConvertConfig(
        object_scale=float(doc.get("object_scale", object_scale)),
        rules=rules,
        declared_atoms=list(declared) if declared is not None else None,
    )
    cfg.check()
    logging.info(f"Loaded {len(rules)} mapping rule(s) from {path}")
    return cfg


def convert_files(obj_path, cfg, mtl_path=None):
    """Read an .obj (and its material library) and convert it.

    Without an explicit mtl_path, the `mtllib` libraries named by the .obj
    are read, resolved next to the .obj file.
    """
    obj_text = read_bytes(obj_path).decode("utf-8")
    if mtl_path is not None:
        materials = parse_mtl(read_bytes(mtl_path).decode("utf-8"), source=mtl_path)
        mesh = parse_obj(obj_text, materials, source=obj_path)
    else:
        def load_library(name):
            path = os.path.join(os.path.dirname(obj_path), name)
            return parse_mtl(read_bytes(path).decode("utf-8"), source=path)

        mesh = parse_obj(obj_text, source=obj_path, load_materials=load_library)
    return convert(mesh, cfg)

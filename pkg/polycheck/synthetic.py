"""Generated models for tests, examples and the scale benchmark."""

import itertools
import logging

import numpy as np

from .model import PolyhedralModelFile, SimplexRecord

# Triangle strip A..F with the colouring used throughout the tests.
STRIP_POINTS = {"A": (0, 0), "B": (1, 1), "C": (2, 0), "D": (3, 1), "E": (4, 0), "F": (5, 1)}
STRIP_CELLS = [
    ("A", "gray"), ("B", "red"), ("C", "red"), ("D", "gray"), ("E", "gray"), ("F", "gray"),
    ("AB", "red"), ("BD", "red"), ("BC", "red"), ("AC", "red"), ("CD", "red"),
    ("DF", "gray"), ("DE", "gray"), ("CE", "gray"), ("EF", "gray"),
    ("BCD", "red"), ("ABC", "red"), ("DEF", "gray"), ("CDE", "green"),
]


def strip_model():
    names = list(STRIP_POINTS)
    coords = [[float(x), float(y), 0.0] for x, y in STRIP_POINTS.values()]
    simplexes = [SimplexRecord(cid, [names.index(c) for c in cid], [atom]) for cid, atom in STRIP_CELLS]
    return PolyhedralModelFile(["red", "gray", "green"], len(names), coords, simplexes)


def _kuhn_tetrahedra(cube):
    x, y, z = cube
    for order in itertools.permutations(range(3)):
        corner = [x, y, z]
        tet = [tuple(corner)]
        for axis in order:
            corner[axis] += 1
            tet.append(tuple(corner))
        yield tet


def _complex_from_solids(solids, atom_names):
    """Simplicial complex of (vertex tuple, atoms) solids; faces take the atoms of the first solid seen."""
    point_index = {}
    by_dim = [dict() for _ in range(4)]
    for vertices, atoms in solids:
        ids = tuple(sorted(point_index.setdefault(v, len(point_index)) for v in vertices))
        for k in range(1, len(ids) + 1):
            for face in itertools.combinations(ids, k):
                by_dim[k - 1].setdefault(face, atoms)

    coords = [[float(c) for c in v] for v in point_index]
    simplexes = []
    for prefix, cells in zip("PETK", by_dim):
        simplexes += [SimplexRecord(f"{prefix}{i}", list(face), list(atoms))
                      for i, (face, atoms) in enumerate(cells.items())]
    return PolyhedralModelFile(list(atom_names), len(point_index), coords, simplexes)


def maze_model(rooms=8, seed=0, corridor_probability=0.6):
    """Tetrahedral 3D maze: a rooms^3 grid of 2x2x2-cube rooms joined by corridors.

    Outer rooms are green (G), the centre room red (R), the rest randomly
    white (W) or black (B); corridor cubes carry `corridor`.
    """
    rng = np.random.default_rng(seed)
    centre = rooms // 2
    solids = []
    for room in itertools.product(range(rooms), repeat=3):
        if room == (centre, centre, centre):
            colour = "R"
        elif min(room) == 0 or max(room) == rooms - 1:
            colour = "G"
        else:
            colour = "W" if rng.random() < 0.5 else "B"
        base = [3 * r for r in room]
        for offset in itertools.product(range(2), repeat=3):
            cube = tuple(b + o for b, o in zip(base, offset))
            solids += [(tet, [colour]) for tet in _kuhn_tetrahedra(cube)]

    corridors = 0
    for room in itertools.product(range(rooms), repeat=3):
        for axis in range(3):
            if room[axis] + 1 >= rooms or rng.random() >= corridor_probability:
                continue
            cube = [3 * r for r in room]
            cube[axis] += 2
            solids += [(tet, ["corridor"]) for tet in _kuhn_tetrahedra(tuple(cube))]
            corridors += 1

    model = _complex_from_solids(solids, ["G", "W", "B", "R", "corridor"])
    logging.info(f"Generated maze: {rooms ** 3} rooms, {corridors} corridors, {model.cell_count} cells")
    return model


# '#' border squares, digits are regions, '.' is empty
CORAL_LAYOUT = [
    "11#rr#22",
    "11#rr#22",
    "...rr...",
    "...rr...",
]
CORAL_SELECTION_COLORS = {"r": (255, 255, 255), "1": (100, 255, 255), "2": (255, 100, 255)}
CORAL_BASE_COLOR = (180, 120, 80)
CORAL_MATERIALS = {"coral": (0.8, 0.5, 0.3), "border": (100 / 255, 100 / 255, 100 / 255)}


def _coral_squares(layout):
    half = len(layout[0]) / 2
    for row, line in enumerate(layout):
        for col, mark in enumerate(line):
            if mark == ".":
                continue
            corners = [(col, row), (col + 1, row), (col + 1, row + 1), (col, row + 1)]
            a, b, c, d = corners
            # Mirror the diagonal across the vertical axis.
            triangles = [(a, b, c), (a, c, d)] if col < half else [(a, b, d), (b, c, d)]
            yield mark, triangles


def coral_obj(layout=CORAL_LAYOUT):
    """Wavefront text (.obj, .mtl) of a small branching coral-like surface.

    Each region's outer edge vertices carry its selection colour, as a user
    would mark them by hand; border squares use the `border` material.
    """
    width, height = len(layout[0]), len(layout)
    squares = list(_coral_squares(layout))
    used = sorted({v for _, tris in squares for t in tris for v in t}, key=lambda v: (v[1], v[0]))
    index = {v: i + 1 for i, v in enumerate(used)}

    def colour(v):
        x, y = v
        for mark, rgb in CORAL_SELECTION_COLORS.items():
            if mark == "r" and y == height and 3 <= x <= 5:
                return rgb
            if mark == "1" and x == 0:
                return rgb
            if mark == "2" and x == width:
                return rgb
        return CORAL_BASE_COLOR

    obj = ["mtllib coral.mtl"]
    for v in used:
        rgb = " ".join(f"{c / 255:.6f}" for c in colour(v))
        obj.append(f"v {v[0]} {-v[1]} 0 {rgb}")
    for material in ("coral", "border"):
        obj.append(f"usemtl {material}")
        for mark, tris in squares:
            if (mark == "#") == (material == "border"):
                obj += ["f " + " ".join(str(index[v]) for v in t) for t in tris]

    mtl = []
    for name, rgb in CORAL_MATERIALS.items():
        mtl += [f"newmtl {name}", "Kd " + " ".join(f"{c:.6f}" for c in rgb), ""]
    return "\n".join(obj) + "\n", "\n".join(mtl)

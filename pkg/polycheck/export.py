"""Coloured Wavefront export of checking results.

Vertices carry the colour of the first highlighted result they satisfy;
triangles are grouped under one material per highlighted result, and every
other triangle goes under a translucent `unsatisfied` material.
"""

import logging
import os
import re
from dataclasses import dataclass, field

import numpy as np
from matplotlib import colormaps

from .errors import ExportError
from .utils import load_yaml_file, write_bytes

UNSATISFIED = "unsatisfied"


def _check_color(color, what):
    if color is None or len(color) != 3 or not all(isinstance(c, int) and 0 <= c <= 255 for c in color):
        raise ExportError(f"{what}: colour must be three integers in [0, 255], got {color!r}")
    return tuple(color)


def _check_opacity(opacity, what):
    if not isinstance(opacity, (int, float)) or not 0.0 <= opacity <= 1.0:
        raise ExportError(f"{what}: opacity must be within [0, 1], got {opacity!r}")
    return float(opacity)


@dataclass
class Highlight:
    name: str
    color: tuple
    opacity: float = 1.0


@dataclass
class ColorMap:
    highlights: list = field(default_factory=list)
    unsatisfied_color: tuple = (200, 200, 200)
    unsatisfied_opacity: float = 0.25

    def __post_init__(self):
        self.unsatisfied_color = _check_color(list(self.unsatisfied_color), UNSATISFIED)
        self.unsatisfied_opacity = _check_opacity(self.unsatisfied_opacity, UNSATISFIED)
        for h in self.highlights:
            h.color = _check_color(list(h.color), h.name)
            h.opacity = _check_opacity(h.opacity, h.name)

    def resolve(self, result_names):
        """Highlights in priority order for the given results.

        Named entries come first, in map order; results the map does not name
        follow in result order with tab10 colours.
        """
        known = set(result_names)
        ordered = []
        for h in self.highlights:
            if h.name in known:
                ordered.append(h)
            else:
                logging.warning(f"Colour map entry '{h.name}' matches no result")
        named = {h.name for h in self.highlights}
        palette = colormaps["tab10"].colors
        extra = [n for n in result_names if n not in named]
        for k, name in enumerate(extra):
            rgb = tuple(int(round(c * 255)) for c in palette[k % len(palette)])
            ordered.append(Highlight(name, rgb, 1.0))
        return ordered


def load_colormap(path, unsatisfied_color=(200, 200, 200), unsatisfied_opacity=0.25):
    doc = load_yaml_file(path) or {}
    if not isinstance(doc, dict):
        raise ExportError(f"{path}: top level must be a mapping")
    highlights = []
    for i, raw in enumerate(doc.get("highlight", [])):
        if not isinstance(raw, dict) or "name" not in raw or "color" not in raw:
            raise ExportError(f"{path}: highlight {i} needs a name and a color")
        highlights.append(Highlight(str(raw["name"]), raw["color"], raw.get("opacity", 1.0)))
    unsatisfied = doc.get(UNSATISFIED, {}) or {}
    return ColorMap(
        highlights,
        unsatisfied.get("color", list(unsatisfied_color)),
        unsatisfied.get("opacity", unsatisfied_opacity),
    )


def _material_name(index, name):
    return f"hl{index}_{re.sub(r'[^A-Za-z0-9_]+', '_', name).strip('_') or 'result'}"


def _fmt(value):
    return f"{float(value):.6g}"


def export_colored_obj(model, results, colormap=None, mtl_name="model.mtl"):
    """Return (.obj bytes, .mtl bytes) for a model and a ResultFile."""
    colormap = colormap or ColorMap()
    n = model.cell_count
    for entry in results.entries:
        if len(entry.values) != n:
            raise ExportError(f"result '{entry.name}' has {len(entry.values)} values, the model has {n} cells")
    highlights = colormap.resolve(results.names)
    vectors = [np.asarray(results[h.name], dtype=bool) for h in highlights]

    # Highest-priority highlight per cell, len(highlights) meaning none.
    owner = np.full(n, len(highlights), dtype=np.int64)
    for k in reversed(range(len(vectors))):
        owner[vectors[k]] = k
    palette = [h.color for h in highlights] + [colormap.unsatisfied_color]

    vertex_color = [colormap.unsatisfied_color] * model.number_of_points
    triangles = {}
    for i, s in enumerate(model.simplexes):
        if len(s.points) == 1:
            vertex_color[s.points[0]] = palette[owner[i]]
        elif len(s.points) == 3:
            triangles.setdefault(int(owner[i]), []).append(s.points)

    obj = [f"# {n} cells, {len(highlights)} highlighted result(s)", f"mtllib {mtl_name}"]
    for (x, y, z), rgb in zip(model.coordinates_of_points, vertex_color):
        obj.append(f"v {_fmt(x)} {_fmt(y)} {_fmt(z)} " + " ".join(_fmt(c / 255) for c in rgb))
    if not triangles:
        logging.warning("Model has no triangles; the exported .obj holds vertices only")

    mtl = []
    materials = [(_material_name(k, h.name), h.color, h.opacity) for k, h in enumerate(highlights)]
    materials.append((UNSATISFIED, colormap.unsatisfied_color, colormap.unsatisfied_opacity))
    for k, (name, rgb, opacity) in enumerate(materials):
        mtl += [f"newmtl {name}", "Kd " + " ".join(_fmt(c / 255) for c in rgb),
                f"d {_fmt(opacity)}", f"Tr {_fmt(1.0 - opacity)}", ""]
        if k in triangles:
            obj.append(f"usemtl {name}")
            obj += ["f " + " ".join(str(p + 1) for p in face) for face in triangles[k]]

    logging.info(f"Exported {model.number_of_points} vertices and "
                 f"{sum(len(t) for t in triangles.values())} triangles")
    return ("\n".join(obj) + "\n").encode("utf-8"), ("\n".join(mtl)).encode("utf-8")


def save_colored_obj(obj_path, model, results, colormap=None):
    """Write the .obj and its sibling .mtl; returns the .mtl path."""
    mtl_path = os.path.splitext(obj_path)[0] + ".mtl"
    obj_bytes, mtl_bytes = export_colored_obj(model, results, colormap, os.path.basename(mtl_path))
    write_bytes(obj_path, obj_bytes)
    write_bytes(mtl_path, mtl_bytes)
    return mtl_path

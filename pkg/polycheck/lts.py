"""Minimised models as labelled transition systems.

States are partition blocks. Each state has one `ap_<atom>` self-loop per
atom its cells satisfy. A `dwn` transition goes from a block to a block
holding a cell its cells cover; a `chg` transition follows a covering step
upwards into a different block.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .checker import sat
from .errors import ExportError
from .model import KripkeFrame

LTS_FORMATS = ("dot", "aut")


@dataclass
class QuotientLTS:
    partition: object
    state_atoms: list
    transitions: list  # sorted (source, label, target), ap_ self-loops excluded
    relation: tuple = field(default=((), ()), repr=False)
    state_colors: dict = field(default_factory=dict)

    @property
    def state_count(self):
        return len(self.state_atoms)

    def labelled_transitions(self):
        """Every transition, atom self-loops first, in export order."""
        loops = [(s, f"ap_{a}", s) for s, atoms in enumerate(self.state_atoms) for a in atoms]
        return loops + list(self.transitions)

    def to_frame(self):
        """Frame over blocks; B R B' when some cell of B lies below some cell of B'."""
        lower, upper = self.relation
        atoms = sorted({a for names in self.state_atoms for a in names})
        atom_sat = {a: np.array([a in names for names in self.state_atoms], dtype=bool) for a in atoms}
        return KripkeFrame(self.state_count, lower, upper, atom_sat)


def quotient(frame, partition):
    blocks = partition.blocks
    reps = partition.representatives
    state_atoms = [[a for a in frame.atom_names if frame.atom_sat[a][r]] for r in reps]

    cover_lower = getattr(frame, "cover_lower", frame.lower)
    cover_upper = getattr(frame, "cover_upper", frame.upper)
    bl, bu = blocks[cover_lower], blocks[cover_upper]
    edges = {(int(u), "dwn", int(lo)) for lo, u in zip(bl, bu)}
    edges |= {(int(lo), "chg", int(u)) for lo, u in zip(bl, bu) if lo != u}

    lifted = {(int(a), int(b)) for a, b in zip(blocks[frame.lower], blocks[frame.upper]) if a != b}
    lifted = sorted(lifted)
    relation = (np.array([a for a, _ in lifted], dtype=np.int64), np.array([b for _, b in lifted], dtype=np.int64))

    lts = QuotientLTS(partition, state_atoms, sorted(edges), relation)
    logging.info(f"Quotient LTS: {lts.state_count} states, {len(lts.transitions)} chg/dwn transitions")
    return lts


def check_lifted(lts, frame, formula, cache=None):
    """Per-block truth of formula, read at each block's representative."""
    vector = sat(frame, formula, cache)
    return vector[lts.partition.representatives]


def _quote(text):
    return text.replace("\\", "\\\\").replace('"', '\\"')


def export_lts(lts, fmt="aut"):
    if fmt not in LTS_FORMATS:
        raise ExportError(f"unknown LTS format '{fmt}' (expected one of {', '.join(LTS_FORMATS)})")
    if lts.state_count == 0:
        raise ExportError("cannot export an empty model")
    transitions = lts.labelled_transitions()
    if fmt == "aut":
        lines = [f"des (0, {len(transitions)}, {lts.state_count})"]
        lines += [f'({s}, "{_quote(label)}", {t})' for s, label, t in transitions]
    else:
        lines = ["digraph quotient {", "  node [shape=box];"]
        for s, atoms in enumerate(lts.state_atoms):
            attrs = f'label="{s}: {_quote(", ".join(atoms))}"'
            if s in lts.state_colors:
                attrs += f', style=filled, fillcolor="{lts.state_colors[s]}"'
            lines.append(f"  s{s} [{attrs}];")
        lines += [f'  s{s} -> s{t} [label="{label}"];' for s, label, t in lts.transitions]
        lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")

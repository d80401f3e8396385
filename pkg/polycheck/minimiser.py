"""Quotients of a frame modulo logical equivalence.

Two engines compute the same partition. `logical_equiv_oracle` refines by
testing every reachability formula whose arguments are unions of current
blocks; it is exponential in the block count and only meant for small
models. `minimise` refines by signatures over the chg/dwn step encoding and
scales to full models.
"""

import enum
import json
import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .checker import sat_gamma
from .errors import BlockCapExceeded
from .results import ResultEntry, ResultFile

CHG, DWN, UP = 0, 1, 2


class EquivalenceMode(enum.Enum):
    GAMMA = "gamma"
    ETA = "eta"


@dataclass(eq=False)
class Partition:
    """Block id per cell, numbered in order of first occurrence."""

    blocks: np.ndarray
    block_count: int

    @property
    def representatives(self):
        _, first = np.unique(self.blocks, return_index=True)
        return first.tolist()

    def members(self, block):
        return np.flatnonzero(self.blocks == block)

    def vector(self, block):
        return self.blocks == block

    def same_as(self, other):
        return self.block_count == other.block_count and np.array_equal(self.blocks, other.blocks)


def _number(keys):
    ids = {}
    blocks = np.array([ids.setdefault(k, len(ids)) for k in keys], dtype=np.int64)
    return blocks, len(ids)


def atom_partition(frame):
    vectors = [frame.atom_sat[a].tolist() for a in frame.atom_names]
    keys = zip(*vectors) if vectors else [()] * frame.cell_count
    blocks, count = _number(keys)
    return Partition(blocks, count)


def _gamma_or_eta(frame, mode, s1, s2):
    result = sat_gamma(frame, s1, s2)
    return s1 & result if mode is EquivalenceMode.ETA else result


def logical_equiv_oracle(frame, mode=EquivalenceMode.GAMMA, block_cap=8):
    mode = EquivalenceMode(mode)
    partition = atom_partition(frame)
    rounds = 0
    while True:
        count = partition.block_count
        if count > block_cap:
            raise BlockCapExceeded(count, block_cap)
        block_vectors = [partition.vector(k) for k in range(count)]
        columns = []
        for subset in range(1 << count):
            region = frame.empty()
            for k in range(count):
                if subset >> k & 1:
                    region |= block_vectors[k]
            # the second argument distributes over unions, single blocks suffice
            for target in block_vectors:
                columns.append(_gamma_or_eta(frame, mode, region, target))
        table = np.stack(columns, axis=1) if columns else np.zeros((frame.cell_count, 0), dtype=bool)
        keys = zip(partition.blocks.tolist(), (row.tobytes() for row in np.packbits(table, axis=1)))
        blocks, new_count = _number(keys)
        rounds += 1
        if new_count == count:
            logging.debug(f"Oracle stable after {rounds} round(s): {count} block(s)")
            return Partition(blocks, new_count)
        partition = Partition(blocks, new_count)


def _group(owner, codes, size):
    """Sorted distinct codes per owner, as tuples."""
    out = [()] * size
    if len(owner) == 0:
        return out
    pairs = np.unique(np.stack([owner, codes], axis=1), axis=0)
    starts = np.flatnonzero(np.r_[True, pairs[1:, 0] != pairs[:-1, 0]])
    for start, chunk in zip(starts, np.split(pairs[:, 1], starts[1:])):
        out[pairs[start, 0]] = tuple(chunk.tolist())
    return out


def _refine(frame, partition, mode):
    n = frame.cell_count
    blocks = partition.blocks
    lower, upper = frame.lower, frame.upper
    bl, bu = blocks[lower], blocks[upper]
    same = bl == bu
    diff = ~same

    # Moves inside a block are silent: group cells reachable that way.
    graph = coo_matrix((np.ones(int(same.sum()), dtype=np.int8), (lower[same], upper[same])), shape=(n, n))
    comp_count, comp = connected_components(graph, directed=False)

    # The relation is reflexive: every cell steps down and up onto itself.
    cells = np.arange(n)
    owner = np.concatenate([comp[lower[diff]], comp[upper[diff]], comp[upper], comp])
    codes = np.concatenate([bu[diff] * 3 + CHG, bl[diff] * 3 + CHG, bl * 3 + DWN, blocks * 3 + DWN])
    comp_signature, _ = _number(_group(owner, codes, comp_count))
    key_parts = [blocks.tolist(), comp_signature[comp].tolist()]

    if mode is EquivalenceMode.GAMMA:
        owner = np.concatenate([lower, cells])
        codes = np.concatenate([bu * 3 + UP, blocks * 3 + UP])
        step_up, _ = _number(_group(owner, codes, n))
        key_parts.append(step_up.tolist())
    return Partition(*_number(zip(*key_parts)))


def minimise(frame, mode=EquivalenceMode.GAMMA):
    mode = EquivalenceMode(mode)
    partition = atom_partition(frame)
    logging.info(f"Minimising {frame.cell_count} cells ({mode.value}); {partition.block_count} atom block(s)")
    rounds = 0
    while True:
        refined = _refine(frame, partition, mode)
        rounds += 1
        if refined.block_count == partition.block_count:
            break
        partition = refined
    logging.info(f"Partition stable after {rounds} round(s): {refined.block_count} block(s)")
    return refined


def partition_results(partition):
    entries = [ResultEntry(f"block{k}", partition.vector(k)) for k in range(partition.block_count)]
    return ResultFile(entries, len(partition.blocks))


def write_partition(partition, model_digest=None):
    """Partition as a result file, plus the block id of every cell."""
    results = partition_results(partition)
    doc = {
        "cellCount": results.cell_count,
        "modelDigest": model_digest,
        "blockCount": partition.block_count,
        "blocks": partition.blocks.tolist(),
        "results": [{"name": e.name, "values": e.values.tolist()} for e in results.entries],
    }
    return json.dumps(doc).encode("utf-8")

import json

import numpy as np
import pytest

from polycheck.checker import sat
from polycheck.errors import BlockCapExceeded
from polycheck.formula import FormulaStore
from polycheck.lts import quotient
from polycheck.minimiser import (
    EquivalenceMode,
    atom_partition,
    logical_equiv_oracle,
    minimise,
    partition_results,
    write_partition,
)
from polycheck.model import PolyhedralModelFile, SimplexRecord, build_poset, parse_model, write_model
from polycheck.obj_ingest import AtomMappingRule, ConvertConfig, convert, parse_mtl, parse_obj
from polycheck.synthetic import CORAL_LAYOUT, coral_obj

MODES = [EquivalenceMode.GAMMA, EquivalenceMode.ETA]


def random_formula(rng, store, atoms, depth, mode):
    if depth == 0 or rng.random() < 0.2:
        pick = int(rng.integers(len(atoms) + 1))
        return store.top() if pick == len(atoms) else store.atom(atoms[pick])
    op = rng.choice(["not", "and", "or", "reach"])
    sub = [random_formula(rng, store, atoms, depth - 1, mode) for _ in range(2)]
    if op == "not":
        return store.not_(sub[0])
    if op == "and":
        return store.and_(*sub)
    if op == "or":
        return store.or_(*sub)
    return store.gamma(*sub) if mode is EquivalenceMode.GAMMA else store.eta(*sub)


def _relabelled(model, atoms_for):
    copy = parse_model(write_model(model))
    for s in copy.simplexes:
        s.atoms = atoms_for(s)
    copy.atom_names = sorted({a for s in copy.simplexes for a in s.atoms})
    return copy


@pytest.mark.parametrize("mode", MODES)
def test_minimise_agrees_with_the_oracle(rng, make_random_complex, mode):
    compared = 0
    for _ in range(60):
        model = make_random_complex(rng, points=int(rng.integers(3, 6)), tops=int(rng.integers(1, 4)),
                                    atoms=("p", "q"), atom_probability=0.5)
        poset = build_poset(model)
        try:
            expected = logical_equiv_oracle(poset, mode, block_cap=8)
        except BlockCapExceeded:
            continue
        got = minimise(poset, mode)
        assert got.same_as(expected), (model, got.blocks, expected.blocks)
        compared += 1
    assert compared > 0


@pytest.mark.parametrize("mode", MODES)
def test_single_atom_strip_collapses_to_one_block(strip, mode):
    poset = build_poset(_relabelled(strip, lambda s: ["p"]))
    assert minimise(poset, mode).block_count == 1
    assert logical_equiv_oracle(poset, mode).block_count == 1


def test_distinct_atoms_give_the_identity_partition(strip):
    poset = build_poset(_relabelled(strip, lambda s: [s.id]))
    partition = minimise(poset)
    assert partition.block_count == 19
    assert partition.blocks.tolist() == list(range(19))


def test_strip_separates_cells_that_see_gray(strip_poset):
    partition = minimise(strip_poset, "gamma")
    c, cd = strip_poset.index_of("C"), strip_poset.index_of("CD")
    assert partition.blocks[c] != partition.blocks[cd]


def test_gamma_partition_refines_eta_partition(rng, make_random_complex):
    for _ in range(30):
        poset = build_poset(make_random_complex(rng, points=7, tops=5))
        fine = minimise(poset, EquivalenceMode.GAMMA)
        coarse = minimise(poset, EquivalenceMode.ETA)
        assert coarse.block_count <= fine.block_count
        for block in range(fine.block_count):
            assert len(set(coarse.blocks[fine.members(block)].tolist())) == 1


def test_isomorphic_components_share_blocks():
    cells = []
    for copy, base in (("x", 0), ("y", 3)):
        tri = [base, base + 1, base + 2]
        cells += [SimplexRecord(f"{copy}v{i}", [p], ["v"] if i else ["w"]) for i, p in enumerate(tri)]
        sides = [(0, 1), (1, 2), (0, 2)]
        cells += [SimplexRecord(f"{copy}e{i}", [tri[a], tri[b]], ["e"]) for i, (a, b) in enumerate(sides)]
        cells.append(SimplexRecord(f"{copy}t", tri, ["t"]))
    model = PolyhedralModelFile(["v", "w", "e", "t"], 6, [[float(i), float(i % 3 == 1), 0.0] for i in range(6)], cells)
    for mode in MODES:
        blocks = minimise(build_poset(model), mode).blocks
        assert blocks[:7].tolist() == blocks[7:].tolist()
        assert len(set(blocks[:7].tolist())) < 7


@pytest.mark.parametrize("mode", MODES)
def test_mirror_image_cells_share_blocks(mode):
    obj_text, mtl_text = coral_obj()
    cfg = ConvertConfig(rules=[AtomMappingRule("face", (100, 100, 100), 10, ["border"])], declared_atoms=["border"])
    model = convert(parse_obj(obj_text, parse_mtl(mtl_text)), cfg)
    poset = build_poset(model)
    points = [tuple(xyz) for xyz in model.coordinates_of_points]
    width = max(x for x, _, _ in points)
    mirror = {i: points.index((width - x, y, z)) for i, (x, y, z) in enumerate(points)}
    by_vertices = {tuple(sorted(v)): i for i, v in enumerate(poset.vertex_sets)}
    blocks = minimise(poset, mode).blocks
    for i, vertices in enumerate(poset.vertex_sets):
        j = by_vertices[tuple(sorted(mirror[v] for v in vertices))]
        assert blocks[i] == blocks[j], poset.ids[i]


@pytest.mark.parametrize("mode", MODES)
def test_formulas_are_constant_on_blocks(rng, make_random_complex, mode):
    store = FormulaStore()
    checked = 0
    for _ in range(5):
        poset = build_poset(make_random_complex(rng, points=8, tops=6))
        partition = minimise(poset, mode)
        for _ in range(25):
            vector = sat(poset, random_formula(rng, store, ["p", "q", "r"], 4, mode))
            for block in range(partition.block_count):
                assert len(set(vector[partition.members(block)].tolist())) == 1
            checked += 1
    assert checked >= 100


def test_oracle_block_cap(strip_poset):
    with pytest.raises(BlockCapExceeded) as excinfo:
        logical_equiv_oracle(strip_poset, block_cap=2)
    assert excinfo.value.block_count == 3


def test_atom_partition_numbers_by_first_occurrence(strip_poset):
    partition = atom_partition(strip_poset)
    assert partition.block_count == 3
    assert partition.blocks[:3].tolist() == [0, 1, 1]
    assert partition.representatives == [0, 1, 18]


def test_partition_as_result_file(strip_poset):
    partition = minimise(strip_poset, "eta")
    results = partition_results(partition)
    assert results.names == [f"block{k}" for k in range(partition.block_count)]
    total = sum(e.values.astype(int) for e in results.entries)
    assert total.tolist() == [1] * 19
    doc = json.loads(write_partition(partition, "abc"))
    assert doc["blockCount"] == partition.block_count
    assert doc["modelDigest"] == "abc"
    assert doc["blocks"] == partition.blocks.tolist()
    assert np.array_equal(np.array(doc["results"][0]["values"]), partition.vector(0))


RANK_OF_MARK = {"#": "border", "r": "rank1", "1": "rank2", "2": "rank2"}


def _ranked_coral():
    """Coral surface where every cell carries exactly one rank or border atom.

    Both side branches are rank 2; any face of a border square is border.
    """
    obj_text, mtl_text = coral_obj()
    cfg = ConvertConfig()
    model = convert(parse_obj(obj_text, parse_mtl(mtl_text)), cfg)
    coords = model.coordinates_of_points

    def square_of(cell):
        col = sum(coords[p][0] for p in cell.points) / (3 * cfg.object_scale)
        row = -sum(coords[p][1] for p in cell.points) / (3 * cfg.object_scale)
        return CORAL_LAYOUT[int(row)][int(col)]

    triangles = [s for s in model.simplexes if s.dimension == 2]
    marks = {id(t): square_of(t) for t in triangles}
    for s in model.simplexes:
        touching = {marks[id(t)] for t in triangles if set(s.points) <= set(t.points)}
        s.atoms = ["border"] if "#" in touching else [RANK_OF_MARK[touching.pop()]]
    model.atom_names = ["rank1", "rank2", "border"]
    return model


@pytest.mark.parametrize("mode", MODES)
def test_sibling_branches_collapse_together(mode):
    model = _ranked_coral()
    poset = build_poset(model)
    blocks = minimise(poset, mode).blocks
    middle = len(CORAL_LAYOUT[0]) * ConvertConfig().object_scale / 2

    def blocks_of(atom, left):
        return {int(blocks[i]) for i, s in enumerate(model.simplexes)
                if s.atoms == [atom] and (np.mean([model.coordinates_of_points[p][0] for p in s.points]) < middle) == left}

    assert blocks_of("rank2", True) == blocks_of("rank2", False)
    assert blocks_of("border", True) == blocks_of("border", False)


def test_coral_quotient_has_the_oracle_block_count():
    poset = build_poset(_ranked_coral())
    partition = minimise(poset, EquivalenceMode.ETA)
    expected = logical_equiv_oracle(poset, EquivalenceMode.ETA, block_cap=8)
    assert partition.same_as(expected)
    assert quotient(poset, partition).state_count == expected.block_count

# scripts/coral_workflow.py
#
# convert -> check branches -> enrich -> check ranks -> minimise -> export,
# on the synthetic coral surface (or on OBJ_PATH when given).

import logging
import os
import sys

from polycheck import PolyCheck
from polycheck.lts import export_lts
from polycheck.minimiser import write_partition
from polycheck.model import model_digest
from polycheck.synthetic import coral_obj
from polycheck.utils import LOG_FORMAT, write_bytes

RULES = "config/coral_rules.yaml"
COLORMAP = "config/coral_colormap.yaml"
BRANCHES_SCRIPT = "scripts/coral_branches.imgql"
RANKS_SCRIPT = "scripts/coral_ranks.imgql"
INJECTIONS = [
    "root (selected verts)=root",
    "root=rank1",
    "b1=rank2",
    "b2=rank3",
    "clborder=border",
]


def main(out_dir="data/coral_workflow", obj_path=None):
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
    os.makedirs(out_dir, exist_ok=True)
    app = PolyCheck()

    if obj_path is None:
        obj_text, mtl_text = coral_obj()
        obj_path = os.path.join(out_dir, "coral.obj")
        write_bytes(obj_path, obj_text.encode("utf-8"))
        write_bytes(os.path.join(out_dir, "coral.mtl"), mtl_text.encode("utf-8"))

    model_path = os.path.join(out_dir, "coral.json")
    app.convert(obj_path, model_path, RULES)

    branches_path = os.path.join(out_dir, "branches.json")
    app.check(BRANCHES_SCRIPT, branches_path, model_path=model_path)

    ranked_path = os.path.join(out_dir, "coral_ranked.json")
    app.enrich(model_path, branches_path, INJECTIONS, ranked_path, mode="replace")

    ranks_path = os.path.join(out_dir, "ranks.json")
    app.check(RANKS_SCRIPT, ranks_path, model_path=ranked_path)

    model, _, partition, lts = app.minimise(ranked_path, mode="eta")
    write_bytes(os.path.join(out_dir, "coral_min.dot"), export_lts(lts, "dot"))
    write_bytes(os.path.join(out_dir, "coral_min.aut"), export_lts(lts, "aut"))
    write_bytes(os.path.join(out_dir, "partition.json"), write_partition(partition, model_digest(model)))

    app.export(ranked_path, ranks_path, os.path.join(out_dir, "coral_ranks.obj"), COLORMAP)
    print(f"Coral workflow complete: {model.cell_count} cells, {partition.block_count} blocks, "
          f"outputs in {out_dir}")


if __name__ == "__main__":
    main(*sys.argv[1:3])

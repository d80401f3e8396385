import logging

from .checker import CheckReport, EvalCache, check_script, sat, sat_eta, sat_gamma, sat_near
from .errors import PolyCheckError
from .export import ColorMap, load_colormap, save_colored_obj
from .lang import expand, format_script, load_prelude, parse_script
from .lts import check_lifted, export_lts, quotient
from .minimiser import EquivalenceMode, logical_equiv_oracle, minimise, write_partition
from .model import build_poset, model_digest, read_model, save_model, validate_complex
from .obj_ingest import ConvertConfig, convert_files, load_rules
from .results import EnrichSpec, enrich_model, load_results, save_results
from .utils import load_config, read_bytes, write_bytes


class PolyCheck:
    """One object per run: configuration plus the convert/check/enrich/minimise/export steps."""

    def __init__(self, config=None, config_path="config/config.yaml"):
        self.config = config if config is not None else load_config(config_path)

    def convert(self, obj_path, out_path, rules_path=None, mtl_path=None, scale=None):
        conf = self.config["convert"]
        if rules_path is not None:
            cfg = load_rules(rules_path, conf["tolerance"], conf["object_scale"])
        else:
            cfg = ConvertConfig(object_scale=conf["object_scale"])
        if scale is not None:
            cfg.object_scale = float(scale)
        model = convert_files(obj_path, cfg, mtl_path)
        save_model(out_path, model)
        return model

    def validate(self, model_path, geometric=False):
        report = validate_complex(read_model(model_path), geometric=geometric)
        for v in report.violations:
            logging.warning(f"{v.kind}: {', '.join(v.ids)} {v.detail}")
        return report

    def check(self, script_path, out_path=None, model_path=None, workers=None, prelude=None, script=None):
        conf = self.config["checker"]
        if script is None:
            script = parse_script(read_bytes(script_path).decode("utf-8"), source=script_path)
        report = check_script(
            model_path,
            script,
            workers=conf["workers"] if workers is None else workers,
            prelude=conf["prelude"] if prelude is None else prelude,
        )
        if out_path is not None:
            save_results(out_path, report)
        return report

    def enrich(self, model_path, results_path, injections, out_path, mode="replace"):
        model = read_model(model_path)
        results = load_results(results_path, model)
        enriched = enrich_model(model, results, EnrichSpec.parse(injections, mode))
        save_model(out_path, enriched)
        return enriched

    def minimise(self, model_path, mode="gamma", oracle=False, block_cap=None):
        model = read_model(model_path)
        poset = build_poset(model)
        if oracle:
            cap = self.config["minimiser"]["block_cap"] if block_cap is None else block_cap
            partition = logical_equiv_oracle(poset, mode, cap)
        else:
            partition = minimise(poset, mode)
        return model, poset, partition, quotient(poset, partition)

    def export(self, model_path, results_path, out_path, colormap_path=None):
        conf = self.config["export"]
        model = read_model(model_path)
        results = load_results(results_path, model)
        if colormap_path is not None:
            colormap = load_colormap(colormap_path, conf["unsatisfied_color"], conf["unsatisfied_opacity"])
        else:
            colormap = ColorMap([], conf["unsatisfied_color"], conf["unsatisfied_opacity"])
        return save_colored_obj(out_path, model, results, colormap)


__all__ = [
    "PolyCheck", "PolyCheckError", "CheckReport", "EvalCache", "EquivalenceMode",
    "build_poset", "check_lifted", "check_script", "expand", "export_lts", "format_script",
    "load_prelude", "logical_equiv_oracle", "minimise", "model_digest", "parse_script",
    "quotient", "read_model", "sat", "sat_eta", "sat_gamma", "sat_near", "write_bytes",
    "write_partition",
]

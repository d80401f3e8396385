import copy
import hashlib
import logging
import multiprocessing
import os

import yaml

from .errors import ConfigError

DEFAULT_CONFIG = {
    "logging": {"level": "INFO"},
    "checker": {"workers": "auto", "prelude": True},
    "convert": {"object_scale": 50.0, "tolerance": 10},
    "export": {"unsatisfied_color": [200, 200, 200], "unsatisfied_opacity": 0.25},
    "minimiser": {"block_cap": 8},
}

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def ensure_directories(paths):
    for path in paths:
        if path:
            os.makedirs(path, exist_ok=True)


def ensure_parent_directory(path):
    ensure_directories([os.path.dirname(os.path.abspath(path))])


def write_bytes(path, data):
    ensure_parent_directory(path)
    with open(path, "wb") as f:
        f.write(data)
    logging.info(f"Wrote {len(data)} bytes to {path}")


def read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


def load_yaml_file(path):
    """Read a YAML (or JSON) document."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: {e}") from e


def load_config(config_path="config/config.yaml"):
    """Merge the YAML config file over the built-in defaults.

    A missing file is not an error; the defaults are used.
    """
    config = copy.deepcopy(DEFAULT_CONFIG)
    if config_path is None or not os.path.exists(config_path):
        logging.debug(f"No config file at {config_path}, using defaults")
        return config
    loaded = load_yaml_file(config_path) or {}
    if not isinstance(loaded, dict):
        raise ConfigError(f"{config_path}: top level must be a mapping")
    for section, values in loaded.items():
        if section not in config:
            logging.warning(f"Ignoring unknown config section '{section}'")
            continue
        if not isinstance(values, dict):
            raise ConfigError(f"{config_path}: section '{section}' must be a mapping")
        for key, value in values.items():
            if key not in config[section]:
                logging.warning(f"Ignoring unknown config key '{section}.{key}'")
                continue
            config[section][key] = value
    _check_config(config, config_path)
    return config


def _check_config(config, config_path):
    workers = config["checker"]["workers"]
    if workers != "auto" and (not isinstance(workers, int) or workers < 1):
        raise ConfigError(f"{config_path}: checker.workers must be 'auto' or an integer >= 1")
    level = str(config["logging"]["level"]).upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        raise ConfigError(f"{config_path}: unknown logging level '{level}'")
    if not isinstance(config["minimiser"]["block_cap"], int) or config["minimiser"]["block_cap"] < 1:
        raise ConfigError(f"{config_path}: minimiser.block_cap must be a positive integer")


def calculate_checksum(data):
    """Calculate a SHA-256 checksum (hex)."""
    return hashlib.sha256(data).hexdigest()


def dynamic_concurrency(cell_count, root_count):
    """Determine the number of evaluation workers from model size."""
    cpu_count = multiprocessing.cpu_count()
    if root_count <= 1 or cell_count <= 10_000:
        # small models run inline
        return 1
    if cell_count <= 100_000:
        return max(1, min(root_count, cpu_count // 2))
    return max(1, min(root_count, cpu_count))


def resolve_workers(setting, cell_count, root_count):
    if setting in (None, "auto"):
        return dynamic_concurrency(cell_count, root_count)
    return int(setting)

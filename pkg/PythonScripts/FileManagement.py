import os
import json
import logging
from typing import Any, Dict


logger = logging.getLogger(__name__)

_CONFIG_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "config.json")


def _configuration_file(file_path: str) -> dict:
    with open(file_path, "r") as config_file:
        return json.load(config_file)


config = _configuration_file(_CONFIG_PATH)


def _section(name: str) -> Dict[str, Any]:
    """
    Return a copy of one section of the configuration file.

    :param name: Section name as written in config.json.
    :return: The section dictionary.
    :raises KeyError: If the section is missing from the configuration file.
    """
    if name not in config:
        raise KeyError(f"'{name}' not found in configuration file!")

    return dict(config[name])


def extract_energy_defaults() -> Dict[str, Any]:
    return _section("Energy Defaults")


def extract_optimizer_defaults() -> Dict[str, Any]:
    return _section("Optimizer Defaults")


def extract_report_defaults() -> Dict[str, Any]:
    return _section("Report Defaults")


def extract_render_defaults() -> Dict[str, Any]:
    return _section("Render Defaults")


def extract_verification_defaults() -> Dict[str, Any]:
    return _section("Verification Defaults")


def output_directory_path() -> str:
    """
    Location where the command line writes artifacts when no explicit output path is given.

    :return: The output directory, relative to the repository root.
    """
    return config.get("Output Directory Path", "3. Output Files")


def worker_count() -> int:
    """
    Number of worker threads allowed by the WC_THREADS environment variable.

    Unset or invalid values fall back to a single worker. The value is capped at the CPU count.

    :return: A positive worker count.
    """
    raw_value = os.environ.get("WC_THREADS")
    if raw_value is None:
        return 1

    try:
        requested = int(raw_value)
    except ValueError:
        logger.warning("Ignoring invalid WC_THREADS value %r", raw_value)
        return 1

    if requested < 1:
        logger.warning("Ignoring non-positive WC_THREADS value %r", raw_value)
        return 1

    return min(requested, os.cpu_count() or 1)

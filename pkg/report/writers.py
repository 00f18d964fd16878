"""
File outputs for a run directory.

CSV files carry '# key=value' header lines with the config hash and seeds,
followed by a header row and full-precision ('%.17g') values.
"""

import logging
import os

import pandas as pd

from perturb.experiment import report_row
from utils.helpers import save_manifest

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def provenance_header(config):
    """Header lines embedding the config hash and every seed."""
    meta = {"config_hash": config.config_hash()}
    meta.update(config.seeds())
    return meta


def write_csv(frame, path, meta=None):
    """Write a DataFrame after '# key=value' lines; read back with pd.read_csv(path, comment='#')."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for key, value in (meta or {}).items():
            f.write(f"# {key}={value}\n")
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("wrote %s (%d rows)", path, len(frame))
    return path


def read_csv(path):
    return pd.read_csv(path, comment="#")


def write_run_outputs(run_dir, problem, result, manifest):
    """manifest.json, result.csv and trajectory.csv for one run. Returns the paths."""
    meta = provenance_header(problem.config)
    paths = {
        "manifest": save_manifest(os.path.join(run_dir, "manifest.json"), manifest),
        "result": write_csv(pd.DataFrame([report_row(problem, result)]),
                            os.path.join(run_dir, "result.csv"), meta),
        "trajectory": write_csv(result.trajectory.to_frame(),
                                os.path.join(run_dir, "trajectory.csv"), meta),
    }
    return paths

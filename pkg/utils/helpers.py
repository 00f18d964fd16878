import hashlib
import json
import logging
import math
import os
import platform

import numpy as np

from utils.errors import DataError

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "WEAKFLOW_OUTPUT_DIR"
__version__ = "1.0.0"


def get_system_info():
    """Get basic system and library information."""
    import pandas
    import scipy

    return {
        'platform': platform.system(),
        'platform_version': platform.version(),
        'machine': platform.machine(),
        'python': platform.python_version(),
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'pandas': pandas.__version__,
        'weakflow': __version__,
    }


def get_library_versions():
    """Versions recorded in run manifests (no host details, so manifests stay portable)."""
    info = get_system_info()
    return {key: info[key] for key in ('numpy', 'scipy', 'pandas', 'weakflow')}


def format_number(value, digits=4):
    """Format a float for the display layer: fixed for moderate magnitudes, scientific otherwise."""
    if value is None:
        return "N/A"
    value = float(value)
    if not math.isfinite(value):
        return str(value)
    if value == 0.0:
        return f"{0.0:.{digits}f}"
    if 1e-2 <= abs(value) < 1e5:
        return f"{value:.{digits}f}"
    mantissa, exponent = f"{value:.{digits}e}".split("e")
    return f"{mantissa}e{int(exponent)}"


def to_jsonable(obj):
    """Convert numpy containers and scalars into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def canonical_json(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"))


def config_hash(config_dict):
    """SHA-256 of the canonical JSON form of a config dictionary."""
    return hashlib.sha256(canonical_json(config_dict).encode("utf-8")).hexdigest()


def default_output_directory():
    """Output root: $WEAKFLOW_OUTPUT_DIR if set, else ./reports."""
    return os.environ.get(OUTPUT_DIR_ENV) or os.path.join(os.getcwd(), "reports")


def create_output_directory(path=None):
    """Create (if needed) and return an output directory."""
    output_dir = path or default_output_directory()
    if not os.path.exists(output_dir):
        os.makedirs(output_dir)
    return output_dir


def run_directory(output_dir, digest, prefix="run"):
    """Per-run directory named after the config hash: <output_dir>/<prefix>-<first 12 hex>."""
    return create_output_directory(os.path.join(output_dir, f"{prefix}-{digest[:12]}"))


def save_manifest(path, manifest):
    """Write a manifest as sorted, indented JSON; byte-identical for identical content."""
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(to_jsonable(manifest), f, indent=2, sort_keys=True, allow_nan=True)
        f.write('\n')
    logger.debug("manifest written to %s", path)
    return path


def load_manifest(path):
    """Load a manifest JSON file."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError:
        raise DataError(f"manifest not found: {path}") from None
    except json.JSONDecodeError as e:
        raise DataError(f"manifest {path} is not valid JSON: {e}") from None

"""
Run configuration.

Values come from the dataclass defaults, then an optional JSON file, then
command-line flags, each layer overriding the previous one.
"""

import builtins
import json
import logging
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import List, Optional

from data_sources.sampling import NOISE_SCALES, SPLIT_MODES
from data_sources.water_table import canonical_property
from flow.integrators import ADJOINT_MODES, INTERPOLATIONS
from utils.errors import ConfigurationError, DataError
from utils.helpers import config_hash, default_output_directory

logger = logging.getLogger(__name__)

_MAX_SEED = 2 ** 64 - 1

# not part of the experiment identity
_UNHASHED = ("output_dir",)


@dataclass
class RunConfig:
    property: str = "density"
    csv_path: Optional[str] = None
    x_column: str = "T"
    y_column: str = "value"
    degree: int = 2
    m1: int = 18
    m2: int = 6
    split_mode: str = "without_replacement"
    split_seed: int = 20240501
    noise_level: float = 0.01
    noise_seed: int = 7
    noise_scale: str = "variance"
    epsilon: float = 0.001
    epsilon_max: float = 0.1
    T: float = 50.0
    n_steps: int = 2000
    u_min: float = -1.0
    u_max: float = 1.0
    tie_tol: float = 1e-12
    theta0: Optional[List[float]] = None
    standardize: bool = True
    adjoint_mode: str = "corrected"
    interpolation: str = "stage"
    output_dir: Optional[str] = None

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, values, base=None):
        """Overlay a mapping of field values on ``base`` (defaults if None)."""
        unknown = sorted(set(values) - set(cls.field_names()))
        if unknown:
            raise ConfigurationError(unknown[0], "unknown configuration field")
        return replace(base or cls(), **values)

    @classmethod
    def from_json(cls, path, base=None):
        try:
            with open(path, "r", encoding="utf-8") as f:
                values = json.load(f)
        except FileNotFoundError:
            raise ConfigurationError("config", f"file not found: {path}") from None
        except json.JSONDecodeError as e:
            raise ConfigurationError("config", f"{path} is not valid JSON: {e}") from None
        if not isinstance(values, dict):
            raise ConfigurationError("config", f"{path} must hold a JSON object")
        # manifests nest the config under "config"
        if "config" in values and isinstance(values["config"], dict):
            values = values["config"]
        return cls.from_dict(values, base)

    @classmethod
    def from_args(cls, args, base=None):
        """Overlay parsed argparse values; flags left at None keep the base value."""
        values = {name: getattr(args, name) for name in cls.field_names()
                  if getattr(args, name, None) is not None}
        return cls.from_dict(values, base)

    # the "property" field shadows the builtin inside the class body
    @builtins.property
    def p(self):
        return self.degree + 1

    def resolved_output_dir(self):
        return self.output_dir or default_output_directory()

    def validate(self):
        """Raise ConfigurationError naming the first invalid field; return self."""
        if self.csv_path is None:
            try:
                canonical_property(self.property)
            except DataError as e:
                raise ConfigurationError("property", str(e)) from None
        elif not self.x_column or not self.y_column:
            raise ConfigurationError("x_column", "CSV input needs both x_column and y_column")

        _integer(self, "degree", minimum=0)
        _integer(self, "m1", minimum=1)
        _integer(self, "m2", minimum=1)
        _choice(self, "split_mode", SPLIT_MODES)
        _integer(self, "split_seed", minimum=0, maximum=_MAX_SEED)
        _real(self, "noise_level", minimum=0.0)
        _integer(self, "noise_seed", minimum=0, maximum=_MAX_SEED)
        _choice(self, "noise_scale", NOISE_SCALES)

        _real(self, "epsilon_max", minimum=0.0, strict=True)
        _real(self, "epsilon", minimum=0.0)
        if self.epsilon >= self.epsilon_max:
            raise ConfigurationError(
                "epsilon", f"{self.epsilon} is outside the expansion regime: "
                           f"must be below epsilon_max={self.epsilon_max}")

        _real(self, "T", minimum=0.0, strict=True)
        _integer(self, "n_steps", minimum=1)
        _real(self, "u_min")
        _real(self, "u_max")
        if self.u_min > self.u_max:
            raise ConfigurationError("u_min", f"{self.u_min} exceeds u_max={self.u_max}")
        _real(self, "tie_tol", minimum=0.0)

        if self.theta0 is not None:
            if not isinstance(self.theta0, (list, tuple)) or len(self.theta0) != self.p:
                raise ConfigurationError("theta0", f"must be a list of {self.p} numbers (degree + 1)")
            for v in self.theta0:
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                    raise ConfigurationError("theta0", f"entries must be finite numbers, got {v!r}")

        if not isinstance(self.standardize, bool):
            raise ConfigurationError("standardize", f"must be true or false, got {self.standardize!r}")
        _choice(self, "adjoint_mode", ADJOINT_MODES)
        _choice(self, "interpolation", INTERPOLATIONS)
        if self.adjoint_mode == "paper_literal":
            logger.warning("paper_literal adjoint mode: p0 dynamics use the Hessian applied to the ones vector")
        return self

    def to_dict(self):
        """Canonical, JSON-serialisable form of the experiment settings."""
        values = asdict(self)
        for key in _UNHASHED:
            values.pop(key)
        if values["theta0"] is not None:
            values["theta0"] = [float(v) for v in values["theta0"]]
        for key in ("noise_level", "epsilon", "epsilon_max", "T", "u_min", "u_max", "tie_tol"):
            values[key] = float(values[key])
        return values

    def config_hash(self):
        return config_hash(self.to_dict())

    def seeds(self):
        return {"split_seed": int(self.split_seed), "noise_seed": int(self.noise_seed)}

    def with_seed(self, seed):
        """Config for one multi-seed replicate: split seed s, noise seed s + 1000003."""
        return replace(self, split_seed=int(seed), noise_seed=int(seed) + 1000003)


def _integer(config, name, minimum=None, maximum=None):
    value = getattr(config, name)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(name, f"must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigurationError(name, f"must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ConfigurationError(name, f"must be <= {maximum}, got {value}")


def _real(config, name, minimum=None, strict=False):
    value = getattr(config, name)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigurationError(name, f"must be a finite number, got {value!r}")
    if minimum is not None and (value < minimum or (strict and value == minimum)):
        bound = ">" if strict else ">="
        raise ConfigurationError(name, f"must be {bound} {minimum}, got {value}")


def _choice(config, name, choices):
    value = getattr(config, name)
    if value not in choices:
        raise ConfigurationError(name, f"must be one of {choices}, got {value!r}")

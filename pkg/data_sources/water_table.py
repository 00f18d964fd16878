"""Thermophysical properties of saturated liquid water, 273.15 K to 373.15 K."""

from data_sources.dataset import Dataset
from utils.errors import DataError

# T [K], density [kg/m^3], specific heat [kJ/kg K], thermal conductivity [W/m K]
_WATER_ROWS = (
    (273.15, 1000.0, 4.217, 0.569),
    (273.0, 1000.0, 4.211, 0.574),
    (280.0, 1000.0, 4.198, 0.582),
    (285.0, 1000.0, 4.189, 0.590),
    (290.0, 999.0, 4.184, 0.598),
    (295.0, 998.0, 4.181, 0.606),
    (300.0, 997.0, 4.179, 0.613),
    (305.0, 995.0, 4.178, 0.620),
    (310.0, 993.0, 4.178, 0.628),
    (315.0, 991.0, 4.179, 0.634),
    (320.0, 989.0, 4.180, 0.640),
    (325.0, 987.0, 4.182, 0.645),
    (330.0, 984.0, 4.184, 0.650),
    (335.0, 982.0, 4.186, 0.656),
    (340.0, 979.0, 4.188, 0.660),
    (345.0, 977.0, 4.191, 0.664),
    (350.0, 974.0, 4.195, 0.668),
    (355.0, 971.0, 4.199, 0.671),
    (360.0, 967.0, 4.203, 0.674),
    (365.0, 963.0, 4.209, 0.677),
    (370.0, 961.0, 4.214, 0.679),
    (373.15, 958.0, 4.217, 0.680),
)

PROPERTIES = ("density", "specific_heat", "conductivity")

_COLUMN = {"density": 1, "specific_heat": 2, "conductivity": 3}

_ALIASES = {
    "density": "density", "rho": "density",
    "specific_heat": "specific_heat", "cp": "specific_heat", "c_p": "specific_heat",
    "conductivity": "conductivity", "k": "conductivity",
}

UNITS = {"density": "kg/m^3", "specific_heat": "kJ/(kg K)", "conductivity": "W/(m K)"}

SHORT_NAMES = {"density": "rho", "specific_heat": "c_p", "conductivity": "k"}


def canonical_property(name):
    """Resolve a property name or alias (rho, cp, k, ...) to its canonical name."""
    key = str(name).strip().lower()
    if key not in _ALIASES:
        raise DataError(f"unknown property {name!r}; expected one of {PROPERTIES}")
    return _ALIASES[key]


def load_builtin_water(property_name):
    """Return the 22 (T, value) pairs of one property in table order, labeled original."""
    prop = canonical_property(property_name)
    column = _COLUMN[prop]
    pairs = [(row[0], row[column]) for row in _WATER_ROWS]
    return Dataset.from_pairs(pairs, label="original", name=prop)

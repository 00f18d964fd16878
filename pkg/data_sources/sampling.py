"""
Train/validation splitting and target dithering.

Both operations are deterministic functions of their seed: each call builds
its own PCG64 generator, so no random state leaks between calls.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from utils.errors import DataError

logger = logging.getLogger(__name__)

SPLIT_MODES = ("without_replacement", "with_replacement")
NOISE_SCALES = ("variance", "std")

_MAX_SEED = 2 ** 64 - 1
_TWO_53 = float(2 ** 53)


def _check_seed(seed, field):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) <= _MAX_SEED:
        raise DataError(f"{field} must be an unsigned 64-bit integer, got {seed!r}")


def make_generator(seed):
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class SplitSpec:
    m1: int
    m2: int
    mode: str = "without_replacement"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in SPLIT_MODES:
            raise DataError(f"split mode must be one of {SPLIT_MODES}, got {self.mode!r}")
        if int(self.m1) < 1:
            raise DataError(f"m1 must be positive, got {self.m1}")
        if int(self.m2) < 1:
            raise DataError(f"m2 must be positive, got {self.m2}")
        _check_seed(self.seed, "split seed")

    def check_against(self, m0):
        if self.mode == "without_replacement":
            if self.m1 > m0:
                raise DataError(
                    f"without_replacement split needs m1 <= m0, got m1={self.m1} > m0={m0}")
            if self.m1 == m0:
                raise DataError(
                    f"without_replacement split with m1 = m0 = {m0} leaves no rows for validation")


@dataclass(frozen=True)
class NoiseSpec:
    level: float
    seed: int = 0
    scale: str = "variance"

    def __post_init__(self):
        if not np.isfinite(self.level) or self.level < 0:
            raise DataError(f"noise level must be a non-negative real, got {self.level!r}")
        if self.scale not in NOISE_SCALES:
            raise DataError(f"noise scale must be one of {NOISE_SCALES}, got {self.scale!r}")
        _check_seed(self.seed, "noise seed")

    def sigma(self, y):
        """Noise standard deviation for targets y.

        ``variance``: sigma^2 = level * Var(y); ``std``: sigma = level * std(y).
        Sample statistics use ddof=1 (population statistics for a single row).
        """
        ddof = 1 if len(y) > 1 else 0
        var = float(np.var(y, ddof=ddof))
        if self.scale == "variance":
            return float(np.sqrt(self.level * var))
        return float(self.level * np.sqrt(var))


def gaussian_variates(seed, n):
    """n standard normal variates by inverse-CDF on a PCG64 stream.

    Each variate consumes one 53-bit integer k, mapped to u = (k + 1/2) / 2^53
    in the open unit interval, then to ndtri(u). Variate i belongs to row i.
    """
    gen = make_generator(seed)
    k = gen.integers(0, 2 ** 53, size=int(n), dtype=np.int64)
    u = (k.astype(float) + 0.5) / _TWO_53
    return ndtri(u)


def split(data, spec):
    """Split an original dataset into (train Z1, validate Z2).

    without_replacement: Z1 is m1 distinct rows (sorted by source index);
    Z2 is m2 draws with replacement from the rows left out of Z1.
    with_replacement: both are bootstrap draws from the whole dataset.
    """
    m0 = data.size
    spec.check_against(m0)
    gen = make_generator(spec.seed)

    if spec.mode == "without_replacement":
        order = gen.permutation(m0)
        train_idx = np.sort(order[:spec.m1])
        leftover = np.sort(order[spec.m1:])
        val_idx = leftover[gen.integers(0, leftover.size, size=spec.m2)]
    else:
        train_idx = gen.integers(0, m0, size=spec.m1)
        val_idx = gen.integers(0, m0, size=spec.m2)

    logger.debug("split %s: train=%s validate=%s", spec.mode, train_idx.tolist(), val_idx.tolist())
    return data.subset(train_idx, "train"), data.subset(val_idx, "validate")


def dither(train, noise):
    """Return the dithered copy of the training set: y~_i = y_i + N(0, sigma^2)."""
    if noise.level == 0:
        return train.with_values(label="dithered")
    sigma = noise.sigma(train.y)
    y_tilde = train.y + sigma * gaussian_variates(noise.seed, train.size)
    return train.with_values(y=y_tilde, label="dithered")


def split_metadata(spec, noise, train, validate, sigma):
    """Split/dither provenance for the run manifest."""
    meta = {
        "split": {
            "mode": spec.mode,
            "m1": spec.m1,
            "m2": spec.m2,
            "seed": spec.seed,
            "train_indices": list(train.indices or ()),
            "validate_indices": list(validate.indices or ()),
        },
        "dither": {
            "level": noise.level,
            "scale": noise.scale,
            "seed": noise.seed,
            "sigma": sigma,
        },
    }
    if spec.mode == "without_replacement":
        meta["split"]["note"] = (
            "train rows drawn without replacement; validation rows drawn with "
            "replacement from the rows left out of the training split")
    return meta

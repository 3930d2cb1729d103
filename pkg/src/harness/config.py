"""Environment settings, key=value run files and solver presets."""

from __future__ import annotations

import dataclasses
import logging
import math
import os
from dataclasses import dataclass

from dotenv import dotenv_values

from ..shared.errors import ConfigurationError
from ..shared.types import RunConfig, SolverId, ToleranceMode

logger = logging.getLogger(__name__)

ENV_PREFIX = "ARENA_"

PRESETS: dict[str, dict[str, str]] = {
    "fmm-high": {"solver": "fmm", "q": "14", "m": "10"},
    "fmm-low": {"solver": "fmm", "q": "6", "m": "4"},
    "gmg-1": {"solver": "gmg", "q": "1"},
    "gmg-4": {"solver": "gmg", "q": "4"},
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off", ""}


def _parse_bool(key: str, value: str) -> bool:
    v = value.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ConfigurationError(f"{key} expects a boolean, got {value!r}")


def _env(name: str, default: str) -> str:
    return os.environ.get(ENV_PREFIX + name, default)


@dataclass(frozen=True)
class ArenaSettings:
    """Process-wide knobs read from ARENA_* environment variables."""
    cache_dir: str | None = None
    sample_count: int = 10_000
    tol_mode: ToleranceMode = ToleranceMode.RELATIVE
    up_equiv_ratio: float = 1.05
    up_check_ratio: float = 2.95
    pinv_cutoff: float = 1e-12
    image_layers: int = 2
    fft_m2l: bool = False
    max_coarse: int = 4096
    threads: int = 1

    @classmethod
    def from_env(cls) -> "ArenaSettings":
        try:
            settings = cls(
                cache_dir=_env("CACHE_DIR", "") or None,
                sample_count=int(_env("SAMPLE_COUNT", "10000")),
                tol_mode=ToleranceMode(_env("TOL_MODE", "relative").lower()),
                up_equiv_ratio=float(_env("UP_EQUIV_RATIO", "1.05")),
                up_check_ratio=float(_env("UP_CHECK_RATIO", "2.95")),
                pinv_cutoff=float(_env("PINV_CUTOFF", "1e-12")),
                image_layers=int(_env("IMAGE_LAYERS", "2")),
                fft_m2l=_parse_bool("ARENA_FFT_M2L", _env("FFT_M2L", "false")),
                max_coarse=int(_env("MAX_COARSE", "4096")),
                threads=int(_env("THREADS", "1")),
            )
        except ValueError as e:
            if isinstance(e, ConfigurationError):
                raise
            raise ConfigurationError(f"bad {ENV_PREFIX}* setting: {e}") from e
        settings.validate()
        return settings

    def validate(self) -> None:
        if self.sample_count < 1:
            raise ConfigurationError("ARENA_SAMPLE_COUNT must be >= 1")
        if not 1.0 < self.up_equiv_ratio < self.up_check_ratio:
            raise ConfigurationError(
                f"need 1 < up_equiv_ratio < up_check_ratio, got {self.up_equiv_ratio}, {self.up_check_ratio}")
        if not 0.0 < self.pinv_cutoff < 1.0:
            raise ConfigurationError(f"pinv cutoff must be in (0, 1), got {self.pinv_cutoff}")
        if self.image_layers < 1:
            raise ConfigurationError("ARENA_IMAGE_LAYERS must be >= 1")
        if self.max_coarse < 1 or self.threads < 1:
            raise ConfigurationError("ARENA_MAX_COARSE and ARENA_THREADS must be >= 1")


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _convert(key: str, value: str):
    if key == "solver":
        try:
            return SolverId(value.strip().lower())
        except ValueError:
            raise ConfigurationError(f"unknown solver {value!r}; expected fft, fmm or gmg") from None
    if key == "case":
        return value.strip()
    if key == "periodic":
        return _parse_bool(key, value)
    if key in ("q", "levels") and value.strip().lower() in ("", "none"):
        return None
    try:
        if key in ("target", "tol", "omega", "rel_tol"):
            v = value.strip().lower()
            return math.inf if v in ("inf", "none", "") else float(v)
        return int(value)
    except ValueError:
        raise ConfigurationError(f"{key} expects a number, got {value!r}") from None


def config_from_mapping(values: dict[str, str | None], base: RunConfig | None = None) -> RunConfig:
    """Apply string values (a run file, a preset or CLI flags) on top of `base`.

    A `preset` key is expanded first so explicit keys override it.
    """
    values = {k.strip().lower(): v for k, v in values.items() if v is not None}
    cfg = base or RunConfig()
    preset = values.pop("preset", None)
    if preset:
        if preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {preset!r}; known: {', '.join(sorted(PRESETS))}")
        cfg = config_from_mapping(PRESETS[preset], cfg)
    updates = {}
    for key, value in values.items():
        if key not in _FIELDS:
            raise ConfigurationError(f"unknown run setting {key!r}")
        updates[key] = _convert(key, str(value))
    return dataclasses.replace(cfg, **updates)


def load_run_file(path: str, base: RunConfig | None = None) -> RunConfig:
    """Read a key=value run file (same syntax as .env)."""
    if not os.path.exists(path):
        raise ConfigurationError(f"run file {path} not found")
    values = dotenv_values(path)
    logger.debug("run file %s: %s", path, values)
    return config_from_mapping(values, base)


def with_settings(cfg: RunConfig, settings: ArenaSettings) -> RunConfig:
    """Fill the thread count from the environment when the run does not set one."""
    if cfg.threads == 1 and settings.threads > 1:
        return dataclasses.replace(cfg, threads=settings.threads)
    return cfg

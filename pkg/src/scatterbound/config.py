"""Sweep configuration: profiles, JSON loading, CLI overrides and hashing.

Lengths are in units of the wavelength unless ``wavelength`` is changed;
``radii`` are disc radii, not diameters.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .dual import CONVENTIONS, DEFAULT_CONVENTION

ALPHA_MODES = ("ub", "loc", "explicit")


class ConfigError(ValueError):
    pass


def _default_contrasts() -> list:
    return [float(x) for x in np.linspace(-4.0, 4.0, 33)]


@dataclass(frozen=True)
class SweepConfig:
    polarizations: tuple = ("TE", "TM")
    wavelength: float = 1.0
    radii: tuple = (0.025, 0.05, 0.1)
    contrasts: tuple = field(default_factory=lambda: tuple(_default_contrasts()))
    spacing: float = 0.01
    restarts: int = 50
    seed: int = 0
    alpha_mode: str = "ub"
    alphas: tuple = ()
    weak_duality_samples: int = 100
    convention: str = DEFAULT_CONVENTION
    out: str = "results"
    threads: int = 1
    profile: str = "paper"

    def __post_init__(self):
        for name in ("polarizations", "radii", "contrasts", "alphas"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "polarizations",
                           tuple(str(p).upper() for p in self.polarizations))
        self.validate()

    def validate(self) -> None:
        if not self.polarizations or set(self.polarizations) - {"TE", "TM"}:
            raise ConfigError(f"polarizations must be drawn from TE/TM, got {self.polarizations}")
        if self.wavelength <= 0:
            raise ConfigError("wavelength must be positive")
        if self.spacing <= 0:
            raise ConfigError("spacing must be positive")
        if not self.radii or min(self.radii) < self.spacing:
            raise ConfigError("need at least one radius and every radius >= spacing")
        if not self.contrasts:
            raise ConfigError("need at least one contrast")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        if self.weak_duality_samples < 0:
            raise ConfigError("weak_duality_samples must be >= 0")
        if self.alpha_mode not in ALPHA_MODES:
            raise ConfigError(f"alpha_mode must be one of {ALPHA_MODES}")
        if self.alpha_mode == "explicit":
            if not self.alphas:
                raise ConfigError("alpha_mode 'explicit' needs a non-empty alphas list")
            if any(not np.isfinite(a) or a < 0 for a in self.alphas):
                raise ConfigError("alphas must be finite and nonnegative")
        if self.convention not in CONVENTIONS:
            raise ConfigError(f"unknown convention {self.convention!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    def hash(self) -> str:
        """Hash of every field that can change the numbers in the outputs."""
        payload = {k: v for k, v in self.to_dict().items() if k not in ("out", "threads")}
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


PROFILES = {
    "paper": {"spacing": 0.01, "restarts": 50},
    "ci": {"spacing": 0.02, "restarts": 8},
}


def load_config(path=None, profile: str | None = None, **overrides) -> SweepConfig:
    """Profile defaults, then the JSON file, then non-None ``overrides``."""
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    if "polarization" in data:
        pol = data.pop("polarization")
        data["polarizations"] = [pol] if isinstance(pol, str) else pol
    profile = profile or data.pop("profile", None) or "paper"
    data.pop("profile", None)
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}")
    known = {f.name for f in fields(SweepConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = {**PROFILES[profile], **data,
              **{k: v for k, v in overrides.items() if v is not None}}
    scale = merged.get("wavelength", 1.0)
    if "spacing" not in data and "spacing" not in overrides:
        merged["spacing"] = PROFILES[profile]["spacing"] * scale
    try:
        return SweepConfig(profile=profile, **merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def with_overrides(config: SweepConfig, **changes) -> SweepConfig:
    return replace(config, **{k: v for k, v in changes.items() if v is not None})

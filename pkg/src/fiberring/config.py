"""
JSON run configuration.

Every physical key carries its unit as a suffix (``_hz``, ``_m``,
``_db_per_km``); rates are given as ``<name>_over_2pi_hz`` and converted to
rad/s here, so no other module sees Hz-valued rates. Keys starting with ``_``
are free-form annotations. Any other unknown key is an error.

A user file only needs the keys it changes; the rest come from the shipped
defaults (``data/measured_anchors.json``).
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .constants import C_LIGHT, TWO_PI
from .cqed import AtomParams, ScalingReference
from .mode import FiberGeometry
from .resonator import ResonatorParams, group_index_from_fsr, regime_coupling

DEFAULTS_RESOURCE = "measured_anchors.json"

_SCHEMA: dict[str, dict[str, type | tuple]] = {
    "resonator": {
        "kappa0_over_2pi_hz": float,
        "kappa_ext_over_2pi_hz": float,
        "fsr_hz": float,
        "length_m": float,
        "resonance_wavelength_m": float,
    },
    "atoms": {
        "gamma_over_2pi_hz": float,
        "g_over_2pi_hz": float,
        "g_surface_over_2pi_hz": float,
        "n_atoms": int,
        "trap_distance_m": float,
    },
    "geometry": {
        "radius_m": float,
        "wavelength_m": float,
        "n_core": float,
        "n_clad": float,
        "profile_r_max_m": float,
        "profile_n_r": int,
        "profile_n_phi": int,
    },
    "scaling": {
        "alpha_fiber_db_per_km": float,
        "length_min_m": float,
        "length_max_m": float,
        "points": int,
    },
    "spectrum": {
        "span_fsr": (float, type(None)),
        "span_hz": (float, type(None)),
        "samples": int,
        "noise_sigma": float,
        "seed": (int, type(None)),
        "regime": str,
    },
    "sweep": {
        "settings": int,
        "noise_sigma": float,
        "seed": (int, type(None)),
        "samples": int,
        "span_linewidths": float,
        "ratio_min": float,
        "ratio_max": float,
    },
    "multimode": {
        "modes": int,
        "length_m": float,
        "detuning_offset_over_2pi_hz": float,
    },
}
_TOP_LEVEL = {"output_dir": (str, type(None))}


class ConfigError(ValueError):
    """Malformed or physically invalid configuration."""


def _check_type(where: str, value: Any, expected) -> Any:
    types = expected if isinstance(expected, tuple) else (expected,)
    if float in types and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if isinstance(value, bool) or not isinstance(value, types):
        names = "/".join(t.__name__ for t in types)
        raise ConfigError(f"{where}: expected {names}, got {value!r}")
    if isinstance(value, float) and not math.isfinite(value):
        raise ConfigError(f"{where}: must be finite")
    return value


def _strip_annotations(d: Mapping[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in d.items() if not k.startswith("_")}


def load_defaults() -> dict[str, Any]:
    text = resources.files("fiberring").joinpath("data").joinpath(DEFAULTS_RESOURCE).read_text()
    return json.loads(text)


def merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> dict[str, Any]:
    """Validate the keys of ``override`` and merge it onto ``base`` block by block."""
    out = copy.deepcopy(_strip_annotations(base))
    for key, value in _strip_annotations(override).items():
        if key in _TOP_LEVEL:
            out[key] = _check_type(key, value, _TOP_LEVEL[key])
        elif key in _SCHEMA:
            if not isinstance(value, Mapping):
                raise ConfigError(f"{key}: expected an object")
            block = dict(_strip_annotations(out.get(key, {})))
            for sub, v in _strip_annotations(value).items():
                if sub not in _SCHEMA[key]:
                    raise ConfigError(f"unknown key {key}.{sub}")
                block[sub] = _check_type(f"{key}.{sub}", v, _SCHEMA[key][sub])
            out[key] = block
        else:
            raise ConfigError(f"unknown key {key!r}")
    return out


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; the raw dict plus the domain objects built from it."""

    raw: dict
    resonator: ResonatorParams
    atoms: AtomParams
    geometry: FiberGeometry
    scaling_reference: ScalingReference

    @classmethod
    def from_dict(cls, override: Mapping[str, Any] | None = None) -> "RunConfig":
        raw = merge({}, load_defaults())
        raw = merge(raw, override or {})
        for block, keys in _SCHEMA.items():
            missing = [k for k in keys if k not in raw.get(block, {}) and not _optional(block, k)]
            if missing:
                raise ConfigError(f"{block}: missing {', '.join(missing)}")
        try:
            resonator = _resonator(raw["resonator"])
            atoms = AtomParams(
                gamma=TWO_PI * raw["atoms"]["gamma_over_2pi_hz"],
                g_single=TWO_PI * raw["atoms"]["g_over_2pi_hz"],
                n_atoms=raw["atoms"]["n_atoms"],
            )
            geometry = FiberGeometry(
                radius_m=raw["geometry"]["radius_m"],
                wavelength_m=raw["geometry"]["wavelength_m"],
                n_core=raw["geometry"]["n_core"],
                n_clad=raw["geometry"]["n_clad"],
            )
            ref = ScalingReference(
                l_ref=resonator.length_m,
                kappa0_ref=resonator.kappa0,
                g_ref=atoms.g_single,
                fsr_ref=resonator.fsr_hz,
                alpha_fiber_db_per_km=raw["scaling"]["alpha_fiber_db_per_km"],
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        cfg = cls(raw, resonator, atoms, geometry, ref)
        cfg._validate_settings()
        return cfg

    @classmethod
    def from_file(cls, path: str | Path | None) -> "RunConfig":
        if path is None:
            return cls.from_dict()
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, Mapping):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(data)

    def block(self, name: str) -> dict:
        return dict(self.raw[name])

    @property
    def output_dir(self) -> str | None:
        return self.raw.get("output_dir")

    @property
    def g_surface(self) -> float:
        return TWO_PI * self.raw["atoms"]["g_surface_over_2pi_hz"]

    @property
    def trap_distance_m(self) -> float:
        return self.raw["atoms"]["trap_distance_m"]

    def resonator_for_regime(self, regime: str | None) -> ResonatorParams:
        """The configured resonator, with kappa_ext reset for ``regime`` if given."""
        if regime is None:
            return self.resonator
        k0 = self.resonator.kappa0
        return ResonatorParams(
            kappa0=k0,
            kappa_ext=regime_coupling(k0, regime),
            omega0=self.resonator.omega0,
            fsr_hz=self.resonator.fsr_hz,
            length_m=self.resonator.length_m,
            group_index=self.resonator.group_index,
        )

    def _validate_settings(self) -> None:
        sp, sw, sc, mm, ge = (self.raw[k] for k in ("spectrum", "sweep", "scaling", "multimode", "geometry"))
        if sp.get("span_fsr") is not None and sp.get("span_hz") is not None:
            raise ConfigError("spectrum: give only one of span_fsr and span_hz")
        checks = [
            (sp.get("span_fsr") is None or sp["span_fsr"] > 0, "spectrum.span_fsr must be positive"),
            (sp.get("span_hz") is None or sp["span_hz"] > 0, "spectrum.span_hz must be positive"),
            (sp["samples"] >= 8, "spectrum.samples must be >= 8"),
            (sp["noise_sigma"] >= 0, "spectrum.noise_sigma must be >= 0"),
            (sp["regime"] in ("under", "critical", "over"), "spectrum.regime must be under, critical or over"),
            (sw["settings"] >= 1, "sweep.settings must be >= 1"),
            (sw["samples"] >= 8, "sweep.samples must be >= 8"),
            (sw["noise_sigma"] >= 0, "sweep.noise_sigma must be >= 0"),
            (sw["span_linewidths"] > 0, "sweep.span_linewidths must be positive"),
            (0 < sw["ratio_min"] <= sw["ratio_max"], "sweep: need 0 < ratio_min <= ratio_max"),
            (0 < sc["length_min_m"] <= sc["length_max_m"], "scaling: need 0 < length_min_m <= length_max_m"),
            (sc["points"] >= 1, "scaling.points must be >= 1"),
            (mm["modes"] >= 1 and mm["modes"] % 2 == 1, "multimode.modes must be a positive odd integer"),
            (mm["length_m"] > 0, "multimode.length_m must be positive"),
            (ge["profile_r_max_m"] > 0, "geometry.profile_r_max_m must be positive"),
            (ge["profile_n_r"] >= 2 and ge["profile_n_phi"] >= 2, "geometry: profile grid needs >= 2 points per axis"),
            (self.raw["atoms"]["g_surface_over_2pi_hz"] > 0, "atoms.g_surface_over_2pi_hz must be positive"),
            (self.raw["atoms"]["trap_distance_m"] >= 0, "atoms.trap_distance_m must be >= 0"),
            (any(s is not None for s in (sp.get("span_fsr"), sp.get("span_hz"))), "spectrum: span_fsr or span_hz required"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)


def _optional(block: str, key: str) -> bool:
    return block == "spectrum" and key in ("span_fsr", "span_hz")


def _resonator(block: Mapping[str, Any]) -> ResonatorParams:
    fsr, length = block["fsr_hz"], block["length_m"]
    if not (fsr > 0 and length > 0):
        raise ConfigError("resonator: fsr_hz and length_m must be positive")
    return ResonatorParams(
        kappa0=TWO_PI * block["kappa0_over_2pi_hz"],
        kappa_ext=TWO_PI * block["kappa_ext_over_2pi_hz"],
        omega0=TWO_PI * C_LIGHT / block["resonance_wavelength_m"] if block["resonance_wavelength_m"] > 0 else -1.0,
        fsr_hz=fsr,
        length_m=length,
        group_index=group_index_from_fsr(fsr, length),
    )

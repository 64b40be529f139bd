"""Experiment configuration: YAML parsing, strict validation, builders.

A config file is a key/value tree with one ``experiment`` kind plus the
blocks that kind needs (spectrum, protocol, ensemble, scan grid, ...).
Unknown keys anywhere in the tree are rejected before any computation
starts, and every error message names the offending key.
"""
from __future__ import annotations

import hashlib

import yaml

from .filters import MeasurementProtocol, Segment, SignPattern, comb_protocol
from .noise import (CompositeSource, ConfigurationError, Lorentzian,
                    NarrowPeak, PowerLaw, SpectrumModel, White)

EXPERIMENTS = ("simulate", "chi-scan", "scan", "reconstruct", "witness",
               "filter-dump")

_SPECTRUM_FIELDS = {
    "white": ({"kind", "level", "cutoff"}, {"level"}),
    "lorentzian": ({"kind", "sigma2", "tau_c"}, {"sigma2", "tau_c"}),
    "narrow_peak": ({"kind", "weight", "center", "width"},
                    {"weight", "center", "width"}),
    "power_law": ({"kind", "amplitude", "exponent", "low_cut", "high_cut"},
                  {"amplitude", "exponent", "low_cut", "high_cut"}),
}


def check_keys(mapping: dict, allowed: set[str], required: set[str],
               context: str) -> None:
    if not isinstance(mapping, dict):
        raise ConfigurationError(f"{context} must be a mapping")
    for key in mapping:
        if key not in allowed:
            raise ConfigurationError(f"unknown key {key!r} in {context}")
    for key in required:
        if key not in mapping:
            raise ConfigurationError(f"missing key {key!r} in {context}")


def _positive(value, key: str, context: str, strict: bool = True) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{context}.{key} must be a number") from None
    if value < 0 or (strict and value == 0):
        raise ConfigurationError(
            f"{context}.{key} must be {'positive' if strict else '>= 0'}, "
            f"got {value:g}"
        )
    return value


def build_spectrum(entries, context: str = "spectrum") -> SpectrumModel:
    if not isinstance(entries, list) or not entries:
        raise ConfigurationError(f"{context} must be a non-empty list")
    components = []
    for i, entry in enumerate(entries):
        ctx = f"{context}[{i}]"
        if not isinstance(entry, dict) or "kind" not in entry:
            raise ConfigurationError(f"{ctx} needs a 'kind' key")
        kind = entry["kind"]
        if kind not in _SPECTRUM_FIELDS:
            raise ConfigurationError(
                f"{ctx}.kind: unknown spectrum component {kind!r}"
            )
        allowed, required = _SPECTRUM_FIELDS[kind]
        check_keys(entry, allowed, required, ctx)
        if kind == "white":
            cutoff = entry.get("cutoff")
            components.append(White(
                _positive(entry["level"], "level", ctx),
                None if cutoff is None else _positive(cutoff, "cutoff", ctx)))
        elif kind == "lorentzian":
            components.append(Lorentzian(
                _positive(entry["sigma2"], "sigma2", ctx),
                _positive(entry["tau_c"], "tau_c", ctx)))
        elif kind == "narrow_peak":
            components.append(NarrowPeak(
                _positive(entry["weight"], "weight", ctx),
                _positive(entry["center"], "center", ctx),
                _positive(entry["width"], "width", ctx)))
        else:
            components.append(PowerLaw(
                _positive(entry["amplitude"], "amplitude", ctx),
                float(entry["exponent"]),
                _positive(entry["low_cut"], "low_cut", ctx),
                _positive(entry["high_cut"], "high_cut", ctx)))
    return SpectrumModel(tuple(components))


def build_protocol(block, context: str = "protocol") -> MeasurementProtocol:
    """Either an explicit segment list or a comb shorthand (tau/delta/N)."""
    if not isinstance(block, dict):
        raise ConfigurationError(f"{context} must be a mapping")
    if "segments" in block:
        check_keys(block, {"segments", "omega"}, {"segments"}, context)
        entries = block["segments"]
        if not isinstance(entries, list) or not entries:
            raise ConfigurationError(f"{context}.segments must be a non-empty list")
        segments = []
        for i, entry in enumerate(entries):
            ctx = f"{context}.segments[{i}]"
            check_keys(entry, {"tau", "delta", "axis"}, {"tau"}, ctx)
            axis = entry.get("axis", "x")
            if axis not in ("x", "y"):
                raise ConfigurationError(f"{ctx}.axis must be 'x' or 'y'")
            segments.append(Segment(
                _positive(entry["tau"], "tau", ctx),
                _positive(entry.get("delta", 0.0), "delta", ctx, strict=False),
                axis))
        return MeasurementProtocol(tuple(segments),
                                   float(block.get("omega", 0.0)))
    check_keys(block, {"tau", "delta", "N", "omega"}, {"tau", "N"}, context)
    n_blocks = block["N"]
    if not isinstance(n_blocks, int) or n_blocks < 1:
        raise ConfigurationError(f"{context}.N must be a positive integer")
    return comb_protocol(
        _positive(block["tau"], "tau", context),
        _positive(block.get("delta", 0.0), "delta", context, strict=False),
        n_blocks, omega=float(block.get("omega", 0.0)))


def build_signs(entry, n: int, context: str = "signs") -> SignPattern:
    if not isinstance(entry, list) or len(entry) != n:
        raise ConfigurationError(
            f"{context} must be a list of {n} entries of +-1"
        )
    if any(s not in (1, -1) for s in entry):
        raise ConfigurationError(f"{context} entries must be +1 or -1")
    return SignPattern(tuple(entry))


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            tree = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config parse error: {exc}") from exc
    if not isinstance(tree, dict):
        raise ConfigurationError("config root must be a mapping")
    if "experiment" not in tree:
        raise ConfigurationError("missing key 'experiment' in config")
    if tree["experiment"] not in EXPERIMENTS:
        raise ConfigurationError(
            f"experiment must be one of {', '.join(EXPERIMENTS)}; "
            f"got {tree['experiment']!r}"
        )
    return tree


def config_digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()

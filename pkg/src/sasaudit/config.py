"""Run configuration: a single JSON document driving generate/score/rate."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

from .corpus import (
    EMOTION_SETS,
    GROUP2_K_CASES,
    GROUP4_DEFAULT_POLICY,
    GROUPS,
    AssociationPolicy,
    class_size,
    emotion_set,
)
from .errors import ConfigError
from .sas import DEFAULT_DEAD_ZONE, OutputMode, SasDescriptor, SasKind
from .stats import DEFAULT_CI_WEIGHTS, DEFAULT_EPSILON

DEFAULT_REPLICATES = 5
DEFAULT_LEVELS = 3

DEFAULT_EMOTION_SETS: dict[str, tuple[str, ...]] = {
    "G1": ("E1", "E2", "E3", "E4", "E5"),
    "G2": ("E3", "E4", "E5"),
    "G3": ("E1", "E2", "E3", "E4", "E5"),
    "G4": ("E3", "E4", "E5"),
}


@dataclass(frozen=True)
class RunConfig:
    sas: tuple[SasDescriptor, ...]
    groups: tuple[str, ...] = GROUPS
    emotion_sets: Mapping[str, tuple[str, ...]] = field(
        default_factory=lambda: dict(DEFAULT_EMOTION_SETS)
    )
    g2_policy: AssociationPolicy = GROUP2_K_CASES[1]
    g4_policy: AssociationPolicy = GROUP4_DEFAULT_POLICY
    replicates: int = DEFAULT_REPLICATES
    ci_weights: tuple[tuple[int, float], ...] = DEFAULT_CI_WEIGHTS
    epsilon: float = DEFAULT_EPSILON
    dead_zone: float = DEFAULT_DEAD_ZONE
    rating_levels: int = DEFAULT_LEVELS
    seed: Optional[int] = None
    out_dir: str = "run"


def _require(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise ConfigError(f"{path}: {message}")


def _parse_policy(raw: Any, path: str, k_cases, valid_keys: Sequence[str]) -> AssociationPolicy:
    _require(isinstance(raw, dict), path, "must be an object")
    if "k" in raw:
        _require(set(raw) == {"k"}, path, "give either a k case or explicit fractions")
        _require(raw["k"] in k_cases, f"{path}.k", f"unknown case {raw['k']!r}")
        return k_cases[raw["k"]]
    percents = {}
    for key, value in raw.items():
        key_path = f"{path}.{key}"
        _require(key in valid_keys, key_path, f"unknown class (expected one of {list(valid_keys)})")
        _require(
            isinstance(value, (list, tuple))
            and len(value) == 2
            and all(isinstance(v, int) for v in value),
            key_path,
            "must be a [positive, negative] integer percent pair",
        )
        percents[key] = (value[0], value[1])
    missing = [key for key in valid_keys if key not in percents]
    _require(not missing, path, f"missing classes: {missing}")
    try:
        return AssociationPolicy.from_percents(percents)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _parse_sas(raw: Any, index: int) -> list[SasDescriptor]:
    path = f"sas[{index}]"
    _require(isinstance(raw, dict), path, "must be an object")
    _require(bool(raw.get("name")), f"{path}.name", "required")
    try:
        kind = SasKind(raw.get("kind", ""))
    except ValueError:
        raise ConfigError(
            f"{path}.kind: unknown kind {raw.get('kind')!r} "
            f"(expected one of {[k.value for k in SasKind]})"
        ) from None
    mode_raw = raw.get("output_mode", "continuous")
    _require(
        mode_raw in ("continuous", "discrete", "both"),
        f"{path}.output_mode",
        f"unknown mode {mode_raw!r}",
    )
    seed = raw.get("seed")
    _require(
        seed is None or isinstance(seed, int),
        f"{path}.seed",
        "must be an integer",
    )
    command = raw.get("command")
    if command is not None:
        _require(
            isinstance(command, list) and command and all(isinstance(c, str) for c in command),
            f"{path}.command",
            "must be a non-empty list of strings",
        )
        command = tuple(command)
    host, port = raw.get("host"), raw.get("port")
    if kind is SasKind.EXTERNAL:
        _require(
            command is not None or (host and port),
            path,
            "external SAS needs a command or host/port",
        )

    def descriptor(name: str, mode: OutputMode) -> SasDescriptor:
        try:
            return SasDescriptor(
                name=name,
                kind=kind,
                output_mode=mode,
                seed=seed,
                command=command,
                host=host,
                port=port,
            )
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from None

    name = str(raw["name"])
    if mode_raw == "both":
        # An output mode of "both" rates the continuous and discretized
        # behaviours as two separate systems.
        return [
            descriptor(name, OutputMode.CONTINUOUS),
            descriptor(f"{name}_disc", OutputMode.DISCRETE),
        ]
    return [descriptor(name, OutputMode(mode_raw))]


def parse_config(raw: Any) -> RunConfig:
    _require(isinstance(raw, dict), "config", "top level must be a JSON object")
    known = {
        "sas",
        "groups",
        "emotion_sets",
        "policies",
        "replicates",
        "ci_weights",
        "epsilon",
        "dead_zone",
        "rating_levels",
        "seed",
        "out_dir",
    }
    for key in raw:
        _require(key in known, key, "unknown config field")

    _require(
        isinstance(raw.get("sas"), list) and raw["sas"], "sas", "need at least one SAS"
    )
    descriptors: list[SasDescriptor] = []
    for index, entry in enumerate(raw["sas"]):
        descriptors.extend(_parse_sas(entry, index))
    names = [d.name for d in descriptors]
    _require(len(set(names)) == len(names), "sas", f"duplicate names in {names}")

    groups = tuple(raw.get("groups", GROUPS))
    for i, group in enumerate(groups):
        _require(group in GROUPS, f"groups[{i}]", f"unknown group {group!r}")
    _require(len(set(groups)) == len(groups), "groups", "duplicate groups")

    sets_raw = raw.get("emotion_sets", {})
    _require(isinstance(sets_raw, dict), "emotion_sets", "must be an object")
    sets = dict(DEFAULT_EMOTION_SETS)
    for group, ids in sets_raw.items():
        _require(group in GROUPS, f"emotion_sets.{group}", "unknown group")
        _require(
            isinstance(ids, list) and ids, f"emotion_sets.{group}", "must be a non-empty list"
        )
        for i, set_id in enumerate(ids):
            _require(
                set_id in EMOTION_SETS, f"emotion_sets.{group}[{i}]", f"unknown set {set_id!r}"
            )
        sets[group] = tuple(ids)
    for group in ("G2", "G4"):
        for set_id in sets[group]:
            _require(
                emotion_set(set_id).bipolar,
                f"emotion_sets.{group}",
                f"{set_id} has a single polarity; confounded groups need both",
            )

    policies_raw = raw.get("policies", {})
    _require(isinstance(policies_raw, dict), "policies", "must be an object")
    for key in policies_raw:
        _require(key in ("G2", "G4"), f"policies.{key}", "only G2 and G4 take policies")
    g2_policy = (
        _parse_policy(policies_raw["G2"], "policies.G2", GROUP2_K_CASES, ("male", "female", "na"))
        if "G2" in policies_raw
        else GROUP2_K_CASES[1]
    )
    g4_policy = (
        _parse_policy(
            policies_raw["G4"], "policies.G4", {}, ("em", "ef", "am", "af", "na")
        )
        if "G4" in policies_raw
        else GROUP4_DEFAULT_POLICY
    )

    replicates = raw.get("replicates", DEFAULT_REPLICATES)
    _require(
        isinstance(replicates, int) and replicates >= 1, "replicates", "must be an integer >= 1"
    )
    n_class = class_size(replicates)
    for group, policy in (("G2", g2_policy), ("G4", g4_policy)):
        if group in groups:
            for key, (pos, _) in policy.fractions.items():
                _require(
                    (n_class * pos).denominator == 1,
                    f"policies.{group}.{key}",
                    f"{n_class} sentences per class times fraction {pos} is not an integer; "
                    "adjust replicates",
                )

    ci_weights_raw = raw.get("ci_weights", [list(pair) for pair in DEFAULT_CI_WEIGHTS])
    _require(
        isinstance(ci_weights_raw, list) and ci_weights_raw, "ci_weights", "must be a non-empty list"
    )
    ci_weights = []
    for i, pair in enumerate(ci_weights_raw):
        pair_path = f"ci_weights[{i}]"
        _require(
            isinstance(pair, list) and len(pair) == 2, pair_path, "must be a [ci, weight] pair"
        )
        ci, weight = pair
        _require(isinstance(ci, int) and 0 < ci < 100, pair_path, f"ci {ci!r} outside (0, 100)")
        _require(
            isinstance(weight, (int, float)) and 0 < weight <= 1,
            pair_path,
            f"weight {weight!r} outside (0, 1]",
        )
        ci_weights.append((ci, float(weight)))
    ordered = sorted(ci_weights)
    _require(
        all(w1 < w2 for (_, w1), (_, w2) in zip(ordered, ordered[1:])),
        "ci_weights",
        "weights must strictly increase with the confidence level",
    )

    epsilon = raw.get("epsilon", DEFAULT_EPSILON)
    _require(
        isinstance(epsilon, (int, float)) and epsilon > 0, "epsilon", "must be a positive number"
    )
    dead_zone = raw.get("dead_zone", DEFAULT_DEAD_ZONE)
    _require(
        isinstance(dead_zone, (int, float)) and 0 <= dead_zone < 1,
        "dead_zone",
        "must be in [0, 1)",
    )
    levels = raw.get("rating_levels", DEFAULT_LEVELS)
    _require(isinstance(levels, int) and levels >= 2, "rating_levels", "must be an integer >= 2")

    seed = raw.get("seed")
    _require(seed is None or isinstance(seed, int), "seed", "must be an integer")
    for index, descriptor in enumerate(descriptors):
        if descriptor.kind is SasKind.RANDOM and descriptor.seed is None:
            _require(
                seed is not None,
                "seed",
                f"required because sas {descriptor.name!r} is random and has no own seed",
            )
            descriptors[index] = SasDescriptor(
                name=descriptor.name,
                kind=descriptor.kind,
                output_mode=descriptor.output_mode,
                seed=seed,
                command=descriptor.command,
                host=descriptor.host,
                port=descriptor.port,
            )

    out_dir = raw.get("out_dir", "run")
    _require(isinstance(out_dir, str) and out_dir, "out_dir", "must be a non-empty string")

    return RunConfig(
        sas=tuple(descriptors),
        groups=groups,
        emotion_sets=sets,
        g2_policy=g2_policy,
        g4_policy=g4_policy,
        replicates=replicates,
        ci_weights=tuple(ci_weights),
        epsilon=float(epsilon),
        dead_zone=float(dead_zone),
        rating_levels=levels,
        seed=seed,
        out_dir=out_dir,
    )


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(raw)

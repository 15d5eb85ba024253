"""Scenario JSON files, result CSVs, and run records.

Scenario files are JSON with an explicit schemaVersion (diff-friendly and
trivially hand-authorable). Parse failures raise
:class:`~ccmech.errors.ScenarioFormatError` with a field-anchored message.

Result CSVs are UTF-8, comma-separated, '.' decimal, with a mandatory header
row preceded by one metadata comment line carrying the schema version, the
seed, and the scenario/config hash. Nothing time-dependent is written, so
repeated runs are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence, Union

from .actions import Action, ActionSpace, VariableSpec
from .ccf import Aggregator, MatchingCCF, OfferPoint, StepCCF
from .errors import ScenarioFormatError
from .hashing import short_hash
from .mechanism import (
    DEFAULT_EPS_FIX,
    DEFAULT_MAX_ITER,
    Scenario,
    Submission,
    VARIANTS,
)

SCHEMA_VERSION = 1


def _require(data: dict, key: str, path: str) -> Any:
    if key not in data:
        raise ScenarioFormatError(f"{path}.{key}: missing")
    return data[key]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioFormatError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _vector(value: Any, path: str, length: Optional[int] = None) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ScenarioFormatError(f"{path}: expected a list, got {value!r}")
    if length is not None and len(value) != length:
        raise ScenarioFormatError(f"{path}: expected {length} entries, got {len(value)}")
    return tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(value))


def _parse_aggregator(data: Any, n_players: int) -> Aggregator:
    if data is None:
        return Aggregator()
    if not isinstance(data, dict):
        raise ScenarioFormatError(f"aggregator: expected an object, got {data!r}")
    mode = data.get("mode", "weightedAverage")
    weights = data.get("weights")
    if weights is not None:
        weights = _vector(weights, "aggregator.weights", n_players)
    try:
        return Aggregator(
            mode=mode,
            weights=weights,
            include_self=bool(data.get("includeSelf", True)),
            normalized=bool(data.get("normalized", True)),
        )
    except ValueError as exc:
        raise ScenarioFormatError(f"aggregator: {exc}") from exc


def _parse_submission(data: Any, path: str, space: ActionSpace) -> Submission:
    if not isinstance(data, dict):
        raise ScenarioFormatError(f"{path}: expected an object, got {data!r}")
    kind = _require(data, "type", path)
    adjust = bool(data.get("adjustToMean", False))
    if kind == "step":
        raw_points = _require(data, "points", path)
        if not isinstance(raw_points, list) or not raw_points:
            raise ScenarioFormatError(f"{path}.points: expected a nonempty list")
        points = []
        for j, raw in enumerate(raw_points):
            ppath = f"{path}.points[{j}]"
            if not isinstance(raw, dict):
                raise ScenarioFormatError(f"{ppath}: expected an object")
            offer = _vector(_require(raw, "offer", ppath), f"{ppath}.offer", space.n_dims)
            threshold = _vector(
                _require(raw, "threshold", ppath), f"{ppath}.threshold", space.n_dims
            )
            points.append(OfferPoint(offer=Action(offer), threshold=threshold))
        return Submission(ccf=StepCCF(tuple(points)), adjust_to_mean=adjust)
    if kind == "matching":
        dim = _require(data, "dim", path)
        if isinstance(dim, str):
            try:
                dim = space.dim_index(dim)
            except KeyError as exc:
                raise ScenarioFormatError(f"{path}.dim: {exc.args[0]}") from exc
        elif not isinstance(dim, int) or isinstance(dim, bool):
            raise ScenarioFormatError(f"{path}.dim: expected a name or index")
        try:
            ccf = MatchingCCF(
                dim=dim,
                rate=_number(_require(data, "rate", path), f"{path}.rate"),
                cap=_number(_require(data, "cap", path), f"{path}.cap"),
            )
        except ValueError as exc:
            raise ScenarioFormatError(f"{path}: {exc}") from exc
        return Submission(ccf=ccf, adjust_to_mean=adjust)
    raise ScenarioFormatError(f"{path}.type: expected 'step' or 'matching', got {kind!r}")


def parse_scenario(data: Any) -> Scenario:
    """Build a validated Scenario from a decoded scenario file."""
    if not isinstance(data, dict):
        raise ScenarioFormatError("top level: expected an object")
    version = _require(data, "schemaVersion", "top level")
    if version != SCHEMA_VERSION:
        raise ScenarioFormatError(
            f"schemaVersion: expected {SCHEMA_VERSION}, got {version!r}"
        )
    players = _require(data, "players", "top level")
    if not isinstance(players, list) or not players or not all(
        isinstance(p, str) for p in players
    ):
        raise ScenarioFormatError("players: expected a nonempty list of names")

    raw_vars = _require(data, "variables", "top level")
    if not isinstance(raw_vars, list) or not raw_vars:
        raise ScenarioFormatError("variables: expected a nonempty list")
    dims = []
    for i, raw in enumerate(raw_vars):
        path = f"variables[{i}]"
        if not isinstance(raw, dict):
            raise ScenarioFormatError(f"{path}: expected an object")
        name = _require(raw, "name", path)
        try:
            dims.append(
                VariableSpec(
                    name=name,
                    lower=_number(_require(raw, "min", path), f"{path}.min"),
                    upper=_number(_require(raw, "max", path), f"{path}.max"),
                )
            )
        except ValueError as exc:
            raise ScenarioFormatError(f"{path}: {exc}") from exc
    space = ActionSpace(dims=tuple(dims))

    raw_subs = _require(data, "submissions", "top level")
    if not isinstance(raw_subs, dict):
        raise ScenarioFormatError("submissions: expected an object keyed by player")
    submissions = []
    for player in players:
        if player not in raw_subs:
            raise ScenarioFormatError(f"submissions[{player}]: missing")
        submissions.append(
            _parse_submission(raw_subs[player], f"submissions[{player}]", space)
        )
    unknown = set(raw_subs) - set(players)
    if unknown:
        raise ScenarioFormatError(f"submissions: unknown players {sorted(unknown)}")

    variant = data.get("variant", "basic")
    if variant not in VARIANTS:
        raise ScenarioFormatError(f"variant: expected one of {VARIANTS}, got {variant!r}")
    epsilon = _number(data.get("epsilon", DEFAULT_EPS_FIX), "epsilon")
    max_iterations = data.get("maxIterations", DEFAULT_MAX_ITER)
    if not isinstance(max_iterations, int) or isinstance(max_iterations, bool):
        raise ScenarioFormatError("maxIterations: expected an integer")

    return Scenario(
        players=tuple(players),
        space=space,
        submissions=tuple(submissions),
        agg=_parse_aggregator(data.get("aggregator"), len(players)),
        variant=variant,
        eps_fix=epsilon,
        max_iter=max_iterations,
    )


def load_scenario(path: Union[str, Path]) -> tuple[Scenario, dict]:
    """Read and parse a scenario file, returning it with the raw dict."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return parse_scenario(data), data


def scenario_to_dict(scenario: Scenario) -> dict:
    """Serialize a Scenario back into the file schema (all fields explicit)."""
    submissions = {}
    for name, sub in zip(scenario.players, scenario.submissions):
        if isinstance(sub.ccf, StepCCF):
            submissions[name] = {
                "type": "step",
                "points": [
                    {"offer": list(p.offer.components), "threshold": list(p.threshold)}
                    for p in sub.ccf.points
                ],
                "adjustToMean": sub.adjust_to_mean,
            }
        else:
            submissions[name] = {
                "type": "matching",
                "dim": scenario.space.dims[sub.ccf.dim].name,
                "rate": sub.ccf.rate,
                "cap": sub.ccf.cap,
                "adjustToMean": sub.adjust_to_mean,
            }
    return {
        "schemaVersion": SCHEMA_VERSION,
        "players": list(scenario.players),
        "variables": [
            {"name": d.name, "min": d.lower, "max": d.upper} for d in scenario.space.dims
        ],
        "aggregator": {
            "mode": scenario.agg.mode,
            "weights": list(scenario.agg.weights) if scenario.agg.weights else None,
            "includeSelf": scenario.agg.include_self,
            "normalized": scenario.agg.normalized,
        },
        "submissions": submissions,
        "variant": scenario.variant,
        "epsilon": scenario.eps_fix,
        "maxIterations": scenario.max_iter,
    }


def scenario_hash(data: Any) -> str:
    return short_hash(data)


@dataclass(frozen=True)
class RunRecord:
    """Provenance of one seeded run, as written to the summary CSV."""

    run_id: int
    seed: int
    scenario_hash: str
    terminal_welfare: float
    converged: bool


def write_csv(
    path: Union[str, Path],
    header: Sequence[str],
    rows: Sequence[Sequence],
    meta: dict,
) -> None:
    """Write a result CSV with the mandatory metadata comment line."""
    meta = {"schemaVersion": SCHEMA_VERSION, **meta}
    lines = ["# " + " ".join(f"{k}={v}" for k, v in meta.items())]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(str(cell) for cell in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

"""Ordered action spaces.

Actions are real vectors under the componentwise partial order, stored in a
cooperativeness-increasing orientation: a larger component always means a
more cooperative action (higher mitigation rate, higher consumption rate,
higher "non-tariff on clean imports"). Raw tariffs never appear as
components; they enter only as derived caps via :func:`tariff_cap`.

All values are immutable and all operations are pure functions, so they can
be shared freely across concurrent workers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

#: Absolute tolerance for all lattice comparisons. Scenario magnitudes are
#: O(1)-O(100), so an absolute tolerance suffices and keeps EQ transitive
#: in practice.
EPS_CMP = 1e-9


class Ordering(enum.Enum):
    LE = "le"
    GE = "ge"
    EQ = "eq"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class VariableSpec:
    """One action dimension with global bounds (units are scenario-defined)."""

    name: str
    lower: float
    upper: float

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError(f"variable {self.name}: bounds must be finite")
        if self.lower > self.upper:
            raise ValueError(
                f"variable {self.name}: lower {self.lower} > upper {self.upper}"
            )


@dataclass(frozen=True)
class Action:
    """A point in action space; one component per variable."""

    components: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(float(c) for c in self.components))

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, i: int) -> float:
        return self.components[i]


@dataclass(frozen=True)
class Profile:
    """One action per player."""

    actions: tuple[Action, ...]

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        dims = {len(a) for a in self.actions}
        if len(dims) > 1:
            raise ValueError(f"inconsistent dimension counts in profile: {dims}")

    @property
    def n_players(self) -> int:
        return len(self.actions)

    def __getitem__(self, i: int) -> Action:
        return self.actions[i]


@dataclass(frozen=True)
class ActionSpace:
    """Shared dimensions plus optional per-player bound overrides.

    ``player_bounds[i]`` is a tuple of (lower, upper) pairs nested inside the
    global variable bounds, or None to inherit them.
    """

    dims: tuple[VariableSpec, ...]
    player_bounds: Optional[tuple[Optional[tuple[tuple[float, float], ...]], ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        if not self.dims:
            raise ValueError("action space needs at least one dimension")
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate dimension names: {names}")
        if self.player_bounds is not None:
            normalized = []
            for p, bounds in enumerate(self.player_bounds):
                if bounds is None:
                    normalized.append(None)
                    continue
                bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
                if len(bounds) != len(self.dims):
                    raise ValueError(f"player {p}: bounds for {len(bounds)} dims, "
                                     f"space has {len(self.dims)}")
                for d, (lo, hi) in enumerate(bounds):
                    spec = self.dims[d]
                    if lo > hi:
                        raise ValueError(f"player {p}, dim {spec.name}: lower > upper")
                    if lo < spec.lower - EPS_CMP or hi > spec.upper + EPS_CMP:
                        raise ValueError(
                            f"player {p}, dim {spec.name}: bounds ({lo}, {hi}) "
                            f"outside global ({spec.lower}, {spec.upper})"
                        )
                normalized.append(bounds)
            object.__setattr__(self, "player_bounds", tuple(normalized))

    @property
    def n_dims(self) -> int:
        return len(self.dims)

    def dim_index(self, name: str) -> int:
        for i, d in enumerate(self.dims):
            if d.name == name:
                return i
        raise KeyError(f"no dimension named {name!r}")

    def bounds(self, player: Optional[int] = None) -> tuple[tuple[float, float], ...]:
        """(lower, upper) per dimension for `player` (global if None)."""
        if (
            player is not None
            and self.player_bounds is not None
            and player < len(self.player_bounds)
            and self.player_bounds[player] is not None
        ):
            return self.player_bounds[player]
        return tuple((d.lower, d.upper) for d in self.dims)

    def bottom(self, player: Optional[int] = None) -> Action:
        return Action(tuple(lo for lo, _ in self.bounds(player)))

    def top(self, player: Optional[int] = None) -> Action:
        return Action(tuple(hi for _, hi in self.bounds(player)))

    def check_action(self, action: Action, player: Optional[int] = None) -> list[str]:
        """Bounds/dimension violations for `action`, empty if valid."""
        violations = []
        if len(action) != self.n_dims:
            return [f"action has {len(action)} components, space has {self.n_dims}"]
        for d, ((lo, hi), value) in enumerate(zip(self.bounds(player), action.components)):
            if not math.isfinite(value):
                violations.append(f"dim {self.dims[d].name}: non-finite value {value}")
            elif value < lo - EPS_CMP or value > hi + EPS_CMP:
                violations.append(
                    f"dim {self.dims[d].name}: {value} outside [{lo}, {hi}]"
                )
        return violations


def _check_same_dims(a: Action, b: Action) -> None:
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")


def leq(a: Action, b: Action, eps: float = EPS_CMP) -> Ordering:
    """Componentwise comparison within an absolute tolerance."""
    _check_same_dims(a, b)
    le = all(x <= y + eps for x, y in zip(a.components, b.components))
    ge = all(y <= x + eps for x, y in zip(a.components, b.components))
    if le and ge:
        return Ordering.EQ
    if le:
        return Ordering.LE
    if ge:
        return Ordering.GE
    return Ordering.INCOMPARABLE


def is_leq(a: Action, b: Action, eps: float = EPS_CMP) -> bool:
    """True iff a <= b in the componentwise order (LE or EQ)."""
    return leq(a, b, eps) in (Ordering.LE, Ordering.EQ)


def join(a: Action, b: Action) -> Action:
    _check_same_dims(a, b)
    return Action(tuple(max(x, y) for x, y in zip(a.components, b.components)))


def meet(a: Action, b: Action) -> Action:
    _check_same_dims(a, b)
    return Action(tuple(min(x, y) for x, y in zip(a.components, b.components)))


def join_profiles(p: Profile, q: Profile) -> Profile:
    if p.n_players != q.n_players:
        raise ValueError(f"player count mismatch: {p.n_players} vs {q.n_players}")
    return Profile(tuple(join(a, b) for a, b in zip(p.actions, q.actions)))


def profiles_eq(p: Profile, q: Profile, eps: float = EPS_CMP) -> bool:
    if p.n_players != q.n_players:
        raise ValueError(f"player count mismatch: {p.n_players} vs {q.n_players}")
    return all(leq(a, b, eps) is Ordering.EQ for a, b in zip(p.actions, q.actions))


def tariff_cap(non_tariff_i: float, mitigation_j: float) -> float:
    """Maximum import tariff country i may levy on supplier j.

    A "non-tariff on clean imports" of n pledged by i caps i's tariff on
    imports from j at 1 - n * (j's mitigation rate); a fully committed
    importer leaves a fully clean supplier untaxed.
    """
    for name, v in (("non_tariff_i", non_tariff_i), ("mitigation_j", mitigation_j)):
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"{name} must be in [0, 1], got {v}")
    return 1.0 - non_tariff_i * mitigation_j

"""Mission scenario configuration: flat key-value text format.

Lines are ``section.key = value`` with ``#`` comments.  Tuples are comma
separated, schedules are space-separated ``time:items`` entries, e.g.::

    partition.r_max = 50
    sim.dt = 0.02
    leader.velocity = 0:1.0,0.5
    follower1.initial_position = -29.9,9.1
    follower1.offsets = 0:12,10 50:-30,-10

Unknown keys are rejected; all values have defaults except where noted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParseError, ValidationError
from .polar import PolarPartition

__all__ = ["FollowerConfig", "ScenarioConfig", "parse_scenario", "loads_scenario"]


@dataclass(frozen=True)
class FollowerConfig:
    initial_position: tuple = (0.0, 0.0)  # leader frame at t = 0
    offsets: tuple = ((0.0, 0.0, 0.0),)  # (time, dx, dy), piecewise constant


@dataclass(frozen=True)
class ScenarioConfig:
    partition: PolarPartition = PolarPartition(50.0, 6, 9)
    dt: float = 0.02
    t_end: float = 150.0
    u_max: float = 5.0
    speed: float = 2.0
    kappa: float = 0.5
    alarm_radius: float = 8.0
    release_radius: float = 12.0
    front_half_angle: float = math.radians(60.0)
    leader_velocity: tuple = ((0.0, 0.0, 0.0),)
    followers: tuple = (FollowerConfig(), FollowerConfig())
    rng_seed: int = 0

    def validate(self) -> "ScenarioConfig":
        if self.dt <= 0:
            raise ValidationError("sim.dt must be positive")
        if self.t_end < 0:
            raise ValidationError("sim.t_end must be nonnegative")
        if self.speed <= 0:
            raise ValidationError("sim.speed must be positive")
        if self.u_max < 0:
            raise ValidationError("sim.u_max must be nonnegative")
        if not 0 < self.kappa <= 1:
            raise ValidationError("sim.kappa must be in (0, 1]")
        if self.alarm_radius <= 0:
            raise ValidationError("avoid.alarm_radius must be positive")
        if self.release_radius <= self.alarm_radius:
            raise ValidationError(
                "avoid.release_radius must exceed avoid.alarm_radius (hysteresis)"
            )
        if not 0 < self.front_half_angle <= math.pi:
            raise ValidationError("avoid.front_half_angle_deg must be in (0, 180]")
        if len(self.followers) != 2:
            raise ValidationError("exactly two followers are required")
        _check_schedule("leader.velocity", self.leader_velocity)
        for idx, f in enumerate(self.followers, start=1):
            _check_schedule(f"follower{idx}.offsets", f.offsets)
        return self

    def switch_times(self) -> tuple:
        """Times (beyond zero) at which any follower offset changes."""
        times = set()
        for f in self.followers:
            for (t, _, _) in f.offsets:
                if t > 0:
                    times.add(t)
        return tuple(sorted(times))


def _check_schedule(name: str, schedule) -> None:
    if not schedule:
        raise ValidationError(f"{name} must have at least one entry")
    times = [entry[0] for entry in schedule]
    if times[0] != 0:
        raise ValidationError(f"{name} must start at time 0")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValidationError(f"{name} times must be strictly increasing")


def schedule_at(schedule, t: float):
    """Value of a piecewise-constant schedule at time t."""
    current = schedule[0]
    for entry in schedule:
        if entry[0] <= t:
            current = entry
        else:
            break
    return current[1:]


_KNOWN_KEYS = {
    "partition.r_max",
    "partition.n_r",
    "partition.n_theta",
    "sim.dt",
    "sim.t_end",
    "sim.u_max",
    "sim.speed",
    "sim.kappa",
    "sim.rng_seed",
    "avoid.alarm_radius",
    "avoid.release_radius",
    "avoid.front_half_angle_deg",
    "leader.velocity",
    "follower1.initial_position",
    "follower1.offsets",
    "follower2.initial_position",
    "follower2.offsets",
}


def _parse_pair(value: str, key: str, path, lineno):
    parts = value.split(",")
    if len(parts) != 2:
        raise ParseError(f"{key} expects 'x,y'", path, lineno)
    try:
        return (float(parts[0]), float(parts[1]))
    except ValueError:
        raise ParseError(f"{key}: bad number in {value!r}", path, lineno) from None


def _parse_schedule(value: str, key: str, path, lineno):
    entries = []
    for item in value.split():
        if ":" not in item:
            raise ParseError(f"{key} entries look like 'time:x,y'", path, lineno)
        t_str, _, rest = item.partition(":")
        try:
            t = float(t_str)
        except ValueError:
            raise ParseError(f"{key}: bad time {t_str!r}", path, lineno) from None
        (x, y) = _parse_pair(rest, key, path, lineno)
        entries.append((t, x, y))
    if not entries:
        raise ParseError(f"{key} must not be empty", path, lineno)
    return tuple(entries)


def loads_scenario(text: str, path=None) -> ScenarioConfig:
    values: dict = {}
    seen_any = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        seen_any = True
        if "=" not in line:
            raise ParseError(f"expected 'key = value' in {raw!r}", path, lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KNOWN_KEYS:
            raise ValidationError(f"unknown key {key!r} (line {lineno})")
        if key in values:
            raise ParseError(f"duplicate key {key!r}", path, lineno)
        values[key] = (value, lineno)
    if not seen_any:
        raise ParseError("empty scenario file", path)

    def take_float(key, default):
        if key not in values:
            return default
        (value, lineno) = values[key]
        try:
            return float(value)
        except ValueError:
            raise ParseError(f"{key}: bad number {value!r}", path, lineno) from None

    def take_int(key, default):
        if key not in values:
            return default
        (value, lineno) = values[key]
        try:
            return int(value)
        except ValueError:
            raise ParseError(f"{key}: bad integer {value!r}", path, lineno) from None

    try:
        partition = PolarPartition(
            take_float("partition.r_max", 50.0),
            take_int("partition.n_r", 6),
            take_int("partition.n_theta", 9),
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc

    followers = []
    for idx in (1, 2):
        pos = (0.0, 0.0)
        key = f"follower{idx}.initial_position"
        if key in values:
            pos = _parse_pair(values[key][0], key, path, values[key][1])
        offsets = ((0.0, 0.0, 0.0),)
        key = f"follower{idx}.offsets"
        if key in values:
            offsets = _parse_schedule(values[key][0], key, path, values[key][1])
        followers.append(FollowerConfig(pos, offsets))

    leader = ((0.0, 0.0, 0.0),)
    if "leader.velocity" in values:
        (value, lineno) = values["leader.velocity"]
        leader = _parse_schedule(value, "leader.velocity", path, lineno)

    cfg = ScenarioConfig(
        partition=partition,
        dt=take_float("sim.dt", 0.02),
        t_end=take_float("sim.t_end", 150.0),
        u_max=take_float("sim.u_max", 5.0),
        speed=take_float("sim.speed", 2.0),
        kappa=take_float("sim.kappa", 0.5),
        alarm_radius=take_float("avoid.alarm_radius", 8.0),
        release_radius=take_float("avoid.release_radius", 12.0),
        front_half_angle=math.radians(take_float("avoid.front_half_angle_deg", 60.0)),
        leader_velocity=leader,
        followers=tuple(followers),
        rng_seed=take_int("sim.rng_seed", 0),
    )
    return cfg.validate()


def parse_scenario(path) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(str(exc), path) from exc
    return loads_scenario(text, path=path)

import math
from dataclasses import replace

import pytest

from polaris.errors import HorizonViolation, ValidationError
from polaris.polar import PolarPartition, RegionIndex, locate
from polaris.scenario import FollowerConfig, ScenarioConfig
from polaris.sim import (
    Episode,
    Mission,
    detect_events,
    initial_world,
    run_scenario,
    step,
    supervisor_react,
)


def small_cfg(**overrides):
    base = dict(
        partition=PolarPartition(40.0, 5, 9),
        dt=0.02,
        t_end=30.0,
        u_max=5.0,
        speed=2.0,
        alarm_radius=8.0,
        release_radius=12.0,
        leader_velocity=((0.0, 0.0, 0.0),),
        followers=(
            FollowerConfig((30.0, 10.0), ((0.0, 10.0, 10.0),)),
            FollowerConfig((-30.0, -10.0), ((0.0, -10.0, -10.0),)),
        ),
    )
    base.update(overrides)
    return ScenarioConfig(**base).validate()


def started_world(cfg):
    mission = Mission(cfg)
    world = initial_world(cfg, mission)
    world, _ = supervisor_react(world, [], cfg, mission)
    return world, mission


def test_initial_commands_push_inward():
    cfg = small_cfg()
    world, _ = started_world(cfg)
    assert world.discrete[0].command == "Cr-1"
    assert world.discrete[1].command == "Cr-2"
    assert world.discrete[0].plant == "O1"


def test_stopped_follower_holds_relative_position_under_moving_leader():
    cfg = small_cfg(leader_velocity=((0.0, 1.0, 0.5),))
    world, mission = started_world(cfg)
    stopped = replace(
        world,
        discrete=(replace(world.discrete[0], stopped=True), world.discrete[1]),
    )
    after = step(stopped, cfg, mission)
    assert after.relative(1) == stopped.relative(1)
    assert after.follower_pos[0] == stopped.follower_pos[0]
    # the absolute position tracks the leader
    abs_before = (
        stopped.leader_pos[0] + stopped.follower_pos[0][0],
        stopped.leader_pos[1] + stopped.follower_pos[0][1],
    )
    abs_after = (
        after.leader_pos[0] + after.follower_pos[0][0],
        after.leader_pos[1] + after.follower_pos[0][1],
    )
    assert abs_after[0] - abs_before[0] == pytest.approx(1.0 * cfg.dt)
    assert abs_after[1] - abs_before[1] == pytest.approx(0.5 * cfg.dt)


def test_euler_step_bound():
    cfg = small_cfg(leader_velocity=((0.0, 2.0, -1.0),))
    world, mission = started_world(cfg)
    after = step(world, cfg, mission)
    for k in (1, 2):
        (x0, y0) = world.follower_pos[k - 1]
        (x1, y1) = after.follower_pos[k - 1]
        lead_dx = 2.0 * cfg.dt
        lead_dy = -1.0 * cfg.dt
        moved = math.hypot((x1 - x0) + lead_dx, (y1 - y0) + lead_dy)
        assert moved <= cfg.u_max * cfg.dt + 1e-12


def test_invariant_hold_for_ten_thousand_steps():
    cfg = small_cfg()
    world, mission = started_world(cfg)
    # park follower 1 in its current region under the hold controller
    region = world.discrete[0].region
    held = replace(
        world,
        discrete=(
            replace(world.discrete[0], command="C0_1", plant="R1"),
            replace(world.discrete[1], stopped=True),
        ),
    )
    for _ in range(10_000):
        held = step(held, cfg, mission)
    (rx, ry) = held.relative(1)
    assert locate(cfg.partition, rx, ry) == region


def test_detect_no_events_on_quiet_step():
    cfg = small_cfg()
    world, mission = started_world(cfg)
    after = step(world, cfg, mission)
    assert detect_events(world, after, cfg, mission) == []


def test_detect_region_crossing_emits_detection():
    cfg = small_cfg()
    world, mission = started_world(cfg)
    moved = replace(
        world,
        follower_pos=((15.0, 10.0), world.follower_pos[1]),  # rel (5, 0): ring 1
    )
    events = detect_events(world, moved, cfg, mission)
    assert events == [("detection", 1, RegionIndex(1, 1))]


def test_detect_alarm_front_vs_not_front():
    cfg = small_cfg()
    world, mission = started_world(cfg)
    # place follower 2 just inside follower 1's alarm radius, ahead of its
    # inward track (follower 1 heads toward -x in its relative frame)
    prev = replace(
        world,
        follower_pos=((30.0, 10.0), (21.0, 10.0)),
    )
    nxt = replace(
        world,
        follower_pos=((30.0, 10.0), (22.5, 10.0)),
    )
    events = detect_events(prev, nxt, cfg, mission)
    assert events[-1] == ("alarm", 1, "Ca12F")
    # off to the side instead: bearing ~65 degrees off the heading
    prev = replace(world, follower_pos=((30.0, 10.0), (25.5, 1.5)))
    nxt = replace(world, follower_pos=((30.0, 10.0), (27.0, 3.5)))
    events = detect_events(prev, nxt, cfg, mission)
    assert events[-1] == ("alarm", 1, "Ca12N")


def test_detect_second_agent_alarm_when_first_unavailable():
    cfg = small_cfg()
    world, mission = started_world(cfg)
    prev = replace(
        world,
        follower_pos=((30.0, 10.0), (21.0, 10.0)),
        discrete=(replace(world.discrete[0], stopped=True), world.discrete[1]),
    )
    nxt = replace(prev, follower_pos=((30.0, 10.0), (22.5, 10.0)))
    events = detect_events(prev, nxt, cfg, mission)
    assert events[-1][0] == "alarm" and events[-1][1] == 2
    assert events[-1][2].startswith("Ca21")


def test_detect_cleared_after_release_radius():
    cfg = small_cfg()
    world, mission = started_world(cfg)
    episode = Episode("Ca12F", 1, 1.0)
    prev = replace(world, follower_pos=((30.0, 10.0), (25.0, 10.0)), episode=episode)
    nxt = replace(prev, follower_pos=((30.0, 10.0), (17.0, 10.0)))
    events = detect_events(prev, nxt, cfg, mission)
    assert events[-1] == ("cleared", 1, None)


def test_supervisor_reacts_to_first_circle_detection_with_hold():
    cfg = small_cfg()
    world, mission = started_world(cfg)
    events = [("detection", 1, RegionIndex(1, 1))]
    after, records = supervisor_react(world, events, cfg, mission)
    assert after.discrete[0].command == "C0_1"
    assert [r.event for r in records] == ["d_1_1_1", "C0_1"]


def test_supervisor_reacts_to_alarm_with_stop_then_turn():
    cfg = small_cfg()
    world, mission = started_world(cfg)
    # region crossing and alarm in the same step: the finished transit lets
    # the turn be commanded immediately after the stop
    events = [("detection", 1, RegionIndex(2, 1)), ("alarm", 1, "Ca12F")]
    after, records = supervisor_react(world, events, cfg, mission)
    names = [r.event for r in records]
    assert names[:3] == ["d_2_1_1", "Ca12F", "Stop2"]
    assert "Cth+1" in names
    assert after.discrete[0].command == "Cth+1"
    assert after.discrete[1].stopped
    assert after.episode is not None and after.episode.avoider == 1


def test_alarm_mid_flight_defers_turn_to_next_detection():
    cfg = small_cfg()
    world, mission = started_world(cfg)
    world, _ = supervisor_react(world, [("detection", 1, RegionIndex(2, 1))], cfg, mission)
    # the re-armed inward command is in flight: only the stop goes out now
    after, records = supervisor_react(world, [("alarm", 1, "Ca12F")], cfg, mission)
    assert [r.event for r in records] == ["Ca12F", "Stop2"]
    assert after.discrete[0].command == "Cr-1"
    # the next boundary crossing hands control to the turn
    deferred, records = supervisor_react(
        after, [("detection", 1, RegionIndex(2, 2))], cfg, mission
    )
    assert [r.event for r in records] == ["d_2_2_1", "Cth+1"]
    # a first-circle crossing parks the agent in formation instead
    parked, records = supervisor_react(
        after, [("detection", 1, RegionIndex(1, 1))], cfg, mission
    )
    assert [r.event for r in records] == ["d_1_1_1", "C0_1"]


def test_release_resumes_both_agents():
    cfg = small_cfg()
    world, mission = started_world(cfg)
    world, _ = supervisor_react(world, [("detection", 1, RegionIndex(2, 1))], cfg, mission)
    world, _ = supervisor_react(world, [("alarm", 1, "Ca12F")], cfg, mission)
    world, records = supervisor_react(world, [("cleared", 1, None)], cfg, mission)
    names = [r.event for r in records]
    assert "alarm_cleared" in names and "R21" in names
    assert world.episode is None
    assert not world.discrete[1].stopped


def test_zero_velocity_bound_flags_unreached_formation():
    cfg = small_cfg(u_max=0.0, t_end=2.0)
    result = run_scenario(cfg)
    assert result.verdicts["t_reach_1"] == "none"
    assert "never reached" in result.verdicts["flags"]
    first = result.rows[1].split(",")
    last = result.rows[-1].split(",")
    assert first[3:7] == last[3:7]  # absolute positions frozen


def test_start_inside_first_ring_rejected():
    cfg = small_cfg(
        followers=(
            FollowerConfig((12.0, 10.0), ((0.0, 10.0, 10.0),)),
            FollowerConfig((-30.0, -10.0), ((0.0, -10.0, -10.0),)),
        )
    )
    with pytest.raises(ValidationError):
        run_scenario(cfg)


def test_switch_beyond_horizon_raises():
    cfg = small_cfg(
        t_end=2.0,
        followers=(
            FollowerConfig((30.0, 10.0), ((0.0, 10.0, 10.0), (1.0, 200.0, 0.0))),
            FollowerConfig((-30.0, -10.0), ((0.0, -10.0, -10.0),)),
        ),
    )
    with pytest.raises(HorizonViolation):
        run_scenario(cfg)


def test_region_tracking_matches_locate_every_step():
    cfg = small_cfg(t_end=20.0)
    mission = Mission(cfg)
    world = initial_world(cfg, mission)
    world, _ = supervisor_react(world, [], cfg, mission)
    for _ in range(1000):
        nxt = step(world, cfg, mission)
        events = detect_events(world, nxt, cfg, mission)
        world, _ = supervisor_react(nxt, events, cfg, mission)
        for k in (1, 2):
            (rx, ry) = world.relative(k)
            assert locate(cfg.partition, rx, ry) == world.discrete[k - 1].region


def test_two_runs_are_identical():
    cfg = small_cfg(t_end=15.0)
    r1 = run_scenario(cfg)
    r2 = run_scenario(cfg)
    assert r1.csv_text() == r2.csv_text()
    assert r1.log_text() == r2.log_text()
    assert r1.verdicts_text() == r2.verdicts_text()


def test_event_log_segments_are_in_the_agent_language():
    cfg = small_cfg(t_end=20.0)
    result = run_scenario(cfg)
    mission = Mission(cfg)
    for k in (1, 2):
        loop = mission.models.agent_loop(k)
        for segment in result.agent_event_segments(k, mission.alphabet(k)):
            assert loop.generates(segment)


def test_output_formats():
    cfg = small_cfg(t_end=5.0)
    result = run_scenario(cfg)
    header = result.csv_text().splitlines()[0]
    assert header == (
        "t,leader_x,leader_y,f1_x,f1_y,f2_x,f2_y,"
        "f1_rel_x,f1_rel_y,f2_rel_x,f2_rel_y,"
        "f1_region_i,f1_region_j,f2_region_i,f2_region_j"
    )
    body = result.csv_text().splitlines()[1:]
    assert len(body) == int(round(cfg.t_end / cfg.dt)) + 1
    assert all(len(line.split(",")) == 15 for line in body)
    for line in result.log_text().splitlines():
        assert line.startswith("t=")
        fields = dict(part.split("=", 1) for part in line.split(" ", 3))
        assert fields["agent"] in ("1", "2", "world")
    times = [rec.t for rec in result.records]
    assert times == sorted(times)
    for key in ("t_reach_1", "t_reach_2", "min_separation", "alarm_episodes"):
        assert key in result.verdicts


def test_reach_and_hold_in_simple_mission():
    cfg = small_cfg(t_end=20.0)
    result = run_scenario(cfg)
    assert result.verdicts["t_reach_1"] != "none"
    assert result.verdicts["t_reach_2"] != "none"
    assert result.verdicts["final_region_1"].startswith("(1,")
    assert result.verdicts["final_region_2"].startswith("(1,")
    assert result.verdicts["alarm_episodes"] == "0"


def test_piecewise_leader_schedule():
    cfg = small_cfg(t_end=2.0, leader_velocity=((0.0, 1.0, 0.0), (1.0, 0.0, 2.0)))
    result = run_scenario(cfg)
    rows = [r.split(",") for r in result.rows]
    at = {float(c[0]): (float(c[1]), float(c[2])) for c in rows}
    assert at[1.0] == (pytest.approx(1.0), pytest.approx(0.0))
    assert at[2.0] == (pytest.approx(1.0), pytest.approx(2.0))

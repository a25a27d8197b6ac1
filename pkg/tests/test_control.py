import dataclasses
import json

import pytest

from dynsplit.control import (
    PmCounterRecord,
    Policy,
    ReconfigEvent,
    Source,
    decide,
    read_counters_csv,
    read_events,
    replay,
    replay_counters,
    synthesize_counters,
    write_counters_csv,
    write_events,
)
from dynsplit.model import BbFunction, Side, Split, placement_of
from dynsplit.scenario import default_scenario, load_scenario, default_scenario_text, run

SC = default_scenario()


def counters(loads, t=0.0, source=Source.O_DU):
    return [PmCounterRecord(t, i, occ, occ, 0.0, source) for i, occ in enumerate(loads)]


def test_no_change_when_counters_match_basis():
    loads = SC.occupancies(SC.periods[3])
    first = decide(counters(loads), None, SC)
    assert first.reason == "initial"
    again = decide(counters(loads), first.splits, SC)
    assert not again.changed


@pytest.mark.parametrize("period", range(8))
def test_h0_decision_equals_offline_optimum(period):
    offline = run(SC).periods[period].splits
    loads = SC.occupancies(SC.periods[period])
    d = decide(counters(loads), (Split.S6,) * 3, SC, Policy(hysteresis=0.0))
    assert d.splits == offline


def test_infeasibility_overrides_hysteresis():
    low = SC.occupancies(SC.periods[0])
    state = decide(counters(low), None, SC).splits
    assert state == (Split.S7B,) * 3
    step = list(low)
    step[0] = 0.9
    d = decide(counters(step), state, SC, Policy(hysteresis=1.0))
    assert d.changed and d.reason == "infeasible"


def test_missing_sector_gives_no_decision(caplog):
    d = decide(counters([0.1, 0.1]), None, SC)
    assert not d.changed and d.reason == "missing-sector"
    assert "no O-DU counters" in caplog.text


def test_divergent_sources_logged(caplog):
    caplog.set_level("INFO")
    recs = counters([0.1, 0.1, 0.1]) + counters([0.5, 0.1, 0.1], source=Source.FH_SWITCH)
    d = decide(recs, None, SC)
    assert d.loads == (0.1, 0.1, 0.1)
    assert "diverges" in caplog.text


def test_replay_h0_matches_offline_timeline():
    offline = [p.splits for p in run(SC).periods]
    rp = replay(SC, None, 0.0)
    assert rp.timeline == offline
    changes = sum(a != b for a, b in zip(offline, offline[1:]))
    assert rp.switch_count == changes


def test_replay_events_are_symmetric_differences():
    rp = replay(SC, None, 0.0)
    assert rp.events
    for e in rp.events:
        a, b = placement_of(e.from_split), placement_of(e.to_split)
        moved = {f for f, _, _ in e.moved_functions}
        assert moved == (a.at(Side.BBH) ^ b.at(Side.BBH))
        for f, src, dst in e.moved_functions:
            assert a[f] is src and b[f] is dst


def test_hysteresis_monotone():
    counts = [replay(SC, None, h).switch_count for h in (0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0)]
    assert all(x >= y for x, y in zip(counts, counts[1:]))


def test_extreme_hysteresis_only_switches_on_infeasibility():
    rp = replay(SC, None, 1.0)
    assert all(d.reason in ("initial", "hold", "infeasible") for d in rp.decisions)


def test_constant_load_no_reconfiguration():
    doc = json.loads(default_scenario_text())
    p = doc["periods"][2]
    doc["periods"] = [dict(p, label=f"p{i}", hours=[i, i + 1]) for i in range(6)]
    rp = replay(load_scenario(doc), 600.0, 0.0)
    assert rp.switch_count == 0 and not rp.events
    assert len(rp.timeline) == 36


def test_loop_never_stays_infeasible():
    rp = replay(SC, None, 0.5)
    for d, state in zip(rp.decisions, rp.timeline):
        loads = d.loads
        from dynsplit.fronthaul import feasible
        assert feasible(state, SC.cells, loads, SC.link)


def test_cadence_lower_bound():
    with pytest.raises(ValueError):
        replay(SC, 0.5)


def test_non_decreasing_timestamps_enforced():
    recs = counters([0.1] * 3, t=10.0) + counters([0.1] * 3, t=5.0)
    with pytest.raises(ValueError):
        replay_counters(recs, SC, [(0, 20)])


def test_event_jsonl_round_trip(tmp_path):
    rp = replay(SC, None, 0.0)
    path = tmp_path / "events.jsonl"
    write_events(rp.events, path)
    lines = path.read_text().splitlines()
    assert len(lines) == len(rp.events)
    assert json.loads(lines[0])["moved_functions"]
    assert read_events(path) == rp.events


def test_counter_csv_round_trip_and_replay(tmp_path):
    recs = synthesize_counters(SC)
    path = tmp_path / "pm.csv"
    write_counters_csv(recs, path)
    back = read_counters_csv(path)
    assert back == recs
    rp = replay_counters(back, SC, [(h * 3600.0, (h + 2) * 3600.0) for h in range(8, 24, 2)], Policy(0.0))
    assert rp.timeline == [p.splits for p in run(SC).periods]


def test_reconfig_event_requires_change():
    with pytest.raises(ValueError):
        ReconfigEvent.between(0.0, 0, Split.S7C, Split.S7C)
    e = ReconfigEvent.between(0.0, 1, Split.S7B, Split.S7C)
    assert {f for f, _, _ in e.moved_functions} == {
        BbFunction.UL_CHAN_EST, BbFunction.MIMO_DETECT, BbFunction.DL_CHAN_EST,
        BbFunction.PRECODE_MATRIX, BbFunction.PRECODE_APPLY,
    }


def test_pm_record_validation():
    with pytest.raises(ValueError):
        PmCounterRecord(0.0, 0, 1.2, 0.1)
    with pytest.raises(ValueError):
        PmCounterRecord(0.0, 0, 0.1, 0.1, source="BBU")

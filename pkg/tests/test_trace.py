import json
from pathlib import Path

import pytest

from mutantucb.algorithms import HyperbandParams, MutantUcbParams, ea_run, EaParams, hyperband_run, mutant_ucb_run
from mutantucb.errors import InconsistentTrace, SchemaMismatch, TraceError, TruncatedTrace
from mutantucb.landscapes import VectorLandscape
from mutantucb.trace import EventTrace, RunResult, replay, replay_trace

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="module")
def run():
    space = VectorLandscape.generate(8, 3, seed=0, slope=0.06, curve_rate=0.3, noise_sd=0.02)
    return mutant_ucb_run(space, MutantUcbParams(T=250, K=20, N=6), seed=3)


def lines(result):
    return result.trace.dumps().splitlines()


def test_round_trip_through_file(tmp_path, run):
    path = tmp_path / "t.jsonl"
    run.trace.save(path)
    assert path.read_text() == run.trace.dumps()
    assert replay_trace(path) == run
    assert EventTrace.load(path) == run.trace


def test_result_serialization_round_trip(tmp_path, run):
    path = tmp_path / "r.json"
    run.save(path)
    assert RunResult.load(path) == run
    assert "trace" not in json.loads(path.read_text())


def test_committed_golden_trace_replays_to_committed_result():
    got = replay_trace(FIXTURES / "golden_mutant_ucb.trace.jsonl")
    assert got == RunResult.load(FIXTURES / "golden_mutant_ucb.result.json")


@pytest.mark.parametrize(
    "make",
    [
        lambda s: ea_run(s, EaParams(T=100, K_ea=3, N=10), seed=1),
        lambda s: hyperband_run(s, HyperbandParams(T=120, R=9, eta=3), seed=1),
    ],
)
def test_replay_other_algorithms(make):
    res = make(VectorLandscape.generate(6, 3, seed=0, noise_sd=0.05))
    assert replay(EventTrace.loads(res.trace.dumps())).result == res


def test_empty_event_list_is_truncated(run):
    with pytest.raises(TruncatedTrace):
        replay(EventTrace.loads(lines(run)[0] + "\n"))


def test_missing_final_event_is_truncated(run):
    with pytest.raises(TruncatedTrace):
        replay(EventTrace.loads("\n".join(lines(run)[:-1])))


def test_consumed_mismatch_is_inconsistent(run):
    rows = lines(run)
    last = json.loads(rows[-1])
    last["consumed"] += 1
    rows[-1] = json.dumps(last)
    with pytest.raises(InconsistentTrace):
        replay(EventTrace.loads("\n".join(rows)))


def test_out_of_range_reward_names_event(run):
    rows = lines(run)
    ev = json.loads(rows[5])
    key = "child_reward" if ev["type"] == "mutate" else "reward"
    if key not in ev:
        pytest.skip("row 5 is not reward-bearing")
    ev[key] = 1.5
    rows[5] = json.dumps(ev)
    with pytest.raises(InconsistentTrace) as info:
        replay(EventTrace.loads("\n".join(rows)))
    assert info.value.index == 4 and "event 4" in str(info.value)


def test_tampered_index_is_detected(run):
    rows = lines(run)
    k = next(i for i, r in enumerate(rows) if '"select"' in r)
    ev = json.loads(rows[k])
    ev["index"] += 1e-9
    rows[k] = json.dumps(ev)
    with pytest.raises(InconsistentTrace, match="does not match"):
        replay(EventTrace.loads("\n".join(rows)))


def test_schema_version_mismatch(run):
    rows = lines(run)
    head = json.loads(rows[0])
    head["schema"] = 99
    rows[0] = json.dumps(head)
    with pytest.raises(SchemaMismatch):
        EventTrace.loads("\n".join(rows))


def test_garbage_is_rejected():
    with pytest.raises(TraceError):
        EventTrace.loads("not json\n")
    with pytest.raises(TruncatedTrace):
        EventTrace.loads("")

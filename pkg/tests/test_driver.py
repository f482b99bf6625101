import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import vesaea.driver as drv
from vesaea.archive import Origin
from vesaea.driver import PerformanceSelector, RunRecord, Stage, contribution_ratio, run
from vesaea.exceptions import ConfigError, EmptyTopRegion
from vesaea.problem import make_problem


def expected_stages(outcomes, use_local=True):
    stage, seq = "global", []
    for improved in outcomes:
        seq.append(stage)
        if not improved and use_local:
            stage = "local" if stage == "global" else "global"
    return seq


class Script:
    """Replaces both round kinds; each round improves or not as scripted."""

    def __init__(self, outcomes, rng_seed=0):
        self.outcomes = list(outcomes)
        self.log = []
        self.rng = np.random.default_rng(rng_seed)

    def _emit(self, archive, evaluator, origin, count):
        improved = self.outcomes.pop(0) if self.outcomes else False
        best = archive.best_value
        for i in range(count):
            x = self.rng.uniform(*archive.bounds)
            evaluator.spent += 1
            # only the first point of an improving round lowers the best
            archive.add(x, best - 1.0 if (improved and i == 0) else best + 1.0 + i, origin)
        return improved

    def global_round(self, archive, evaluator, rng, params=None):
        self.log.append("global")
        self._emit(archive, evaluator, Origin.GLOBAL_LOOCV, min(2, evaluator.remaining))

    def local_round(self, archive, evaluator, rng, *args):
        self.log.append("local")
        self._emit(archive, evaluator, Origin.LOCAL, 1)


def scripted_run(monkeypatch, outcomes, dim=4, budget=None, use_local=True):
    script = Script(outcomes)
    monkeypatch.setattr(drv.global_search, "global_round", script.global_round)
    monkeypatch.setattr(drv.local_search, "local_round", script.local_round)
    rec = run(make_problem("sphere", dim, 0), total_budget=budget, use_local=use_local, seed=0)
    return script, rec


@pytest.mark.parametrize("outcomes", [
    [True, True, True, True, True, True, True, True],
    [False] * 12,
    [True, False, True, False, False, True, True, False, False, False, True, False],
    [False, True, True, False, True, False, False, False, True, True, True, False],
])
def test_selector_follows_script(monkeypatch, outcomes):
    script, rec = scripted_run(monkeypatch, outcomes, dim=4, budget=40)
    n = len(script.log)
    assert script.log == expected_stages(outcomes + [False] * n, True)[:n]
    assert [s.value for s, _ in rec.rounds] == script.log
    assert [imp for _, imp in rec.rounds] == (outcomes + [False] * n)[:n]


@settings(max_examples=40, deadline=None)
@given(outcomes=st.lists(st.booleans(), min_size=1, max_size=30))
def test_selector_property(outcomes):
    sel = PerformanceSelector()
    best, seq = 10.0, []
    for improved in outcomes:
        seq.append(sel.begin_round(best).value)
        best = best - 1 if improved else best
        assert sel.end_round(best) is improved
    assert seq == expected_stages(outcomes)


def test_selector_equal_best_is_not_an_improvement():
    sel = PerformanceSelector()
    sel.begin_round(1.0)
    assert not sel.end_round(1.0)
    assert sel.current_stage is Stage.LOCAL


def test_selector_without_local_search_stays_global(monkeypatch):
    script, _ = scripted_run(monkeypatch, [False] * 20, dim=4, budget=40, use_local=False)
    assert set(script.log) == {"global"}


def test_partial_global_round_at_budget_end(monkeypatch):
    # 8 init + 3 search evaluations: a full global round, then one with a single evaluation
    script, rec = scripted_run(monkeypatch, [True, True], dim=5, budget=13)
    assert script.log == ["global", "global"]
    assert len(rec) == 13


def test_d5_budget_protocol():
    rec = run(make_problem("griewank", 5, 1), seed=1)
    assert len(rec) == 25 and rec.init_size == 10
    assert rec.origins[:10] == [Origin.INIT] * 10
    assert all(o is not Origin.INIT for o in rec.origins[10:])
    assert np.all(np.diff(rec.best_so_far) <= 0)
    spent = sum(2 if s is Stage.GLOBAL else 1 for s, _ in rec.rounds)
    assert spent in (15, 16)  # the last global round may be cut to one evaluation


def test_ablation_origins():
    rec = run(make_problem("ackley", 5, 2), use_local=False, seed=2)
    assert set(rec.origins[10:]) <= {Origin.GLOBAL_LOOCV, Origin.GLOBAL_SURROGATE}
    assert rec.variant == "vesaea-wovls"


def test_deterministic_record():
    p = make_problem("rastrigin", 4, 3)
    a, b = run(p, seed=3), run(p, seed=3)
    assert a.to_json() == b.to_json() and a.to_csv() == b.to_csv()


def test_ablation_keeps_init_block():
    p = make_problem("sphere", 5, 4)
    a, b = run(p, seed=4), run(p, use_local=False, seed=4)
    assert np.array_equal(a.points[:10], b.points[:10])
    assert np.array_equal(a.values[:10], b.values[:10])


def test_archive_stays_duplicate_free():
    rec = run(make_problem("sphere", 3, 5), seed=5)
    lo, hi = make_problem("sphere", 3, 5).bounds
    u = (rec.points - lo) / (hi - lo)
    d = np.sqrt(((u[:, None] - u[None]) ** 2).sum(-1))
    assert d[np.triu_indices(len(u), 1)].min() > 1e-8


def test_empty_top_region_counts_as_no_improvement(monkeypatch):
    def empty(*a, **k):
        raise EmptyTopRegion("none")

    monkeypatch.setattr(drv.local_search, "local_round", empty)
    rec = run(make_problem("sphere", 3, 0), seed=0)
    assert len(rec) == 15
    assert all(not imp for s, imp in rec.rounds if s is Stage.LOCAL)


def test_config_errors():
    p = make_problem("sphere", 4)
    with pytest.raises(ConfigError):
        run(p, init_size=6)
    with pytest.raises(ConfigError):
        run(p, total_budget=8, init_size=8)


def hand_record(origins, values, init_size):
    return RunRecord(np.zeros((len(values), 1)), np.asarray(values, float), origins, init_size)


def test_contribution_three_global_one_local():
    o = [Origin.INIT] * 2 + [Origin.GLOBAL_LOOCV, Origin.GLOBAL_SURROGATE, Origin.LOCAL,
                             Origin.GLOBAL_SURROGATE, Origin.LOCAL]
    v = [10, 9, 8, 7, 6, 5, 7]
    c = contribution_ratio(hand_record(o, v, 2))
    assert (c.global_ratio, c.local_ratio, c.no_improvement) == (0.75, 0.25, False)
    assert c.global_share == pytest.approx(3 / 4) and c.local_share == pytest.approx(1 / 4)


def test_contribution_only_local():
    o = [Origin.INIT] * 2 + [Origin.GLOBAL_LOOCV, Origin.LOCAL, Origin.LOCAL]
    c = contribution_ratio(hand_record(o, [5, 4, 6, 3, 2], 2))
    assert (c.global_ratio, c.local_ratio) == (0.0, 1.0)


def test_contribution_no_improvement():
    o = [Origin.INIT] * 2 + [Origin.GLOBAL_LOOCV, Origin.LOCAL]
    c = contribution_ratio(hand_record(o, [1, 2, 3, 1], 2))
    assert (c.global_ratio, c.local_ratio, c.no_improvement) == (0.0, 0.0, True)


def test_csv_layout():
    rec = hand_record([Origin.INIT, Origin.INIT, Origin.LOCAL], [3.0, 1.5, 2.0], 2)
    lines = rec.to_csv().splitlines()
    assert lines[0] == "evaluation_index,value,best_so_far,origin_stage"
    assert lines[1:] == ["1,3.0,3.0,init", "2,1.5,1.5,init", "3,2.0,1.5,local"]
    assert json.loads(rec.to_json())["origins"] == ["init", "init", "local"]


def test_json_carries_contribution_shares():
    o = [Origin.INIT] * 2 + [Origin.GLOBAL_LOOCV, Origin.LOCAL]
    c = json.loads(hand_record(o, [5, 4, 3, 1], 2).to_json())["contribution"]
    assert c["global_ratio"] == 0.5 and c["local_share"] == pytest.approx(2 / 3)

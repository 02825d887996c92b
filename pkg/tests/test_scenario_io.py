"""Scenario file round trips and the committed fixtures."""

from pathlib import Path

import pytest

from cuplab.adversary import Composite, Crash, EquivocatePd, FakePd, InnerEquivocate, Silent
from cuplab.gen import GenParams, generate
from cuplab.presets import scenario_for_instance, twin_core_split_scenario
from cuplab.scenario import (
    Scenario,
    default_proposals,
    load_scenario,
    resolve_pre_rule,
    resolve_valid,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    strategy_from_dict,
    strategy_to_dict,
)
from cuplab.graphs import complete_graph

FIXTURES = Path(__file__).resolve().parent.parent / "scenarios"


class TestStrategyCodec:
    @pytest.mark.parametrize(
        "strategy",
        [
            Silent(),
            Crash(at=120),
            FakePd(claimed=frozenset({1, 2, 3})),
            EquivocatePd(
                per_receiver=((2, frozenset({1, 3})), (5, frozenset({1}))),
                default=frozenset({1, 2}),
            ),
            EquivocatePd(per_receiver=(), default=None),
            InnerEquivocate(),
            Composite(parts=(FakePd(claimed=frozenset({7})), Crash(at=5))),
        ],
    )
    def test_round_trip(self, strategy):
        assert strategy_from_dict(strategy_to_dict(strategy)) == strategy

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            strategy_from_dict({"kind": "mystery"})


class TestScenarioCodec:
    def test_round_trip_inline_graph(self, tmp_path):
        inst = generate(GenParams(8, 1, "cup"), 3)
        scenario = scenario_for_instance(inst, "knownF", 3)
        path = tmp_path / "s.json"
        save_scenario(scenario, path)
        back = load_scenario(path)
        assert back == scenario

    def test_graph_by_file_reference(self, tmp_path):
        g = complete_graph([1, 2, 3, 4])
        (tmp_path / "g.graph").write_text(g.to_adjacency_text())
        data = scenario_to_dict(
            Scenario(graph=g, mode="knownF", f=0, proposals=default_proposals(g))
        )
        data["graph"] = {"file": "g.graph"}
        scenario = scenario_from_dict(data, base_dir=tmp_path)
        assert scenario.graph == g

    def test_validation_errors(self):
        g = complete_graph([1, 2, 3, 4])
        with pytest.raises(ValueError):
            Scenario(graph=g, mode="sideways", f=0, proposals=default_proposals(g))
        with pytest.raises(ValueError):
            Scenario(graph=g, mode="knownF", f=0, proposals={})
        with pytest.raises(ValueError):
            Scenario(
                graph=g, mode="knownF", f=0,
                faulty={9: Silent()}, proposals=default_proposals(g),
            )

    def test_pre_rule_resolution(self):
        import random

        rng = random.Random(0)
        rule = resolve_pre_rule({"kind": "constant", "delay": 9})
        assert rule(1, 2, 0, rng) == 9
        rule = resolve_pre_rule({"kind": "uniformRandom", "lo": 2, "hi": 2})
        assert rule(1, 2, 0, rng) == 2
        with pytest.raises(ValueError):
            resolve_pre_rule({"kind": "wormhole"})

    def test_valid_resolution(self):
        accept = resolve_valid({"kind": "acceptAll"})
        assert accept("anything") and accept(None)
        pfx = resolve_valid({"kind": "prefix", "prefix": "val-"})
        assert pfx("val-3") and not pfx("evil") and not pfx(7)
        with pytest.raises(ValueError):
            resolve_valid({"kind": "quantum"})


class TestCommittedFixtures:
    def test_twin_core_split_matches_builder(self):
        from_file = load_scenario(FIXTURES / "twin_core_split.json")
        built = twin_core_split_scenario(seed=7)
        assert from_file == built

    def test_satellite_fixture_loads(self):
        scenario = load_scenario(FIXTURES / "satellite_silent.json")
        assert scenario.mode == "knownF" and scenario.f == 1
        assert set(scenario.faulty) == {4}

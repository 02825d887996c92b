"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report.  Every tolerance and time budget is pinned here.
"""

import random
import time

from cuplab.auth import SigningAuthority
from cuplab.gen import GenParams, generate, min_vertices
from cuplab.graphs import complete_graph, disjoint_paths, implies_k, safe_subgraph
from cuplab.harness import run
from cuplab.inner import leader_of, quorum_size
from cuplab.messages import SetPds
from cuplab.presets import scenario_for_instance, twin_core_split_scenario
from cuplab.protocol import Process, ProcessConfig, sink_check
from cuplab.topologies import twin_core_graph, two_cluster_graph
from cuplab.validation import (
    FailedClause,
    check_bft_cup,
    check_bft_cupft,
    is_extended_k_osr,
    is_k_osr,
)

from inner_cluster import build_cluster, run_to_decision
from oracle import oracle_disjoint_paths, oracle_implies_k, random_digraph


def report(criterion: str, ok: bool, elapsed: float, budget: float, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    tail = f" ({detail})" if detail else ""
    print(f"[{status}] {criterion}: {elapsed:.1f}s of {budget:.0f}s budget{tail}")
    assert ok, f"{criterion} failed{tail}"
    assert elapsed < budget, f"{criterion} exceeded {budget}s budget: {elapsed:.1f}s"


def test_criterion_1_flow_oracle_equivalence():
    start = time.monotonic()
    rng = random.Random(0xACCE551)
    pair_checks = 0
    implies_checks = 0
    for _ in range(200):
        g = random_digraph(rng, rng.randint(3, 8), rng.uniform(0.1, 0.9))
        ids = sorted(g.vertices)
        for s in ids:
            for t in ids:
                if s != t:
                    assert disjoint_paths(g, s, t) == oracle_disjoint_paths(g, s, t)
                    pair_checks += 1
        for _ in range(3):
            a = frozenset(rng.sample(ids, rng.randint(1, min(2, len(ids) - 1))))
            rest = [v for v in ids if v not in a]
            b = frozenset(rng.sample(rest, rng.randint(1, min(2, len(rest)))))
            k = rng.randint(1, 3)
            assert implies_k(g, a, b, k) == oracle_implies_k(g, a, b, k)
            implies_checks += 1
    elapsed = time.monotonic() - start
    report(
        "criterion 1 (flow oracle equivalence)", True, elapsed, 10.0,
        f"{pair_checks} pair checks, {implies_checks} set checks",
    )


def test_criterion_2_validator_truth_table():
    start = time.monotonic()
    k4 = complete_graph([1, 2, 3, 4])
    ok = check_bft_cup(k4, {4}, 1).verdict

    two_cluster, bridge = two_cluster_graph()
    ok = ok and not check_bft_cup(two_cluster, bridge, 1).verdict

    twin, _ = twin_core_graph()
    ok = ok and is_k_osr(twin, 1).verdict
    extended_report, cert = is_extended_k_osr(twin, 1)
    ok = ok and not extended_report.verdict
    ok = ok and extended_report.failed_clause is FailedClause.CORE_NOT_UNIQUE
    ok = ok and cert is None
    elapsed = time.monotonic() - start
    report("criterion 2 (validator truth table)", ok, elapsed, 1.0)


def test_criterion_3_generator_soundness():
    start = time.monotonic()
    rng = random.Random(0x6E6E)
    checked = 0
    for seed in range(100):
        n = rng.randint(4, 12)
        f = rng.randint(0, min(2, (n - 1) // 3))
        inst = generate(GenParams(n, f, "cup"), seed)
        assert check_bft_cup(inst.graph, inst.faulty, f).verdict
        checked += 1
    for seed in range(100):
        n = rng.randint(5, 10)
        f = rng.randint(0, min(2, (n - 1) // 3))
        inst = generate(GenParams(n, f, "cupft"), seed)
        assert check_bft_cupft(inst.graph, inst.faulty, f).verdict
        checked += 1
    for seed in range(100):
        f = rng.randint(0, 1)
        lo = min_vertices("cup-only", f)
        n = rng.randint(lo, lo + 3)
        inst = generate(GenParams(n, f, "cup-only"), seed)
        assert check_bft_cup(inst.graph, inst.faulty, f).verdict
        ext, _ = is_extended_k_osr(safe_subgraph(inst.graph, inst.faulty), f + 1)
        assert not ext.verdict
        assert ext.failed_clause is FailedClause.CORE_NOT_UNIQUE
        checked += 1
    elapsed = time.monotonic() - start
    report(
        "criterion 3 (generator soundness)", checked == 300, elapsed, 60.0,
        f"{checked} instances",
    )


def test_criterion_4_sink_discovery_reproduction():
    start = time.monotonic()
    rng = random.Random(0x7E0425)
    runs = 0
    for seed in range(100):
        f = rng.choice([1, 1, 2])
        n = rng.randint(max(6, 3 * f + 2), 12)
        inst = generate(GenParams(n, f, "cup", extra_edge_density=1.0), seed)
        scenario = scenario_for_instance(inst, "knownF", seed)
        verdict = run(scenario)
        oracle = set(verdict.oracle_sink)
        for pid, pv in verdict.per_process.items():
            assert pv.discovered is not None, f"seed {seed}: {pid} never identified"
            got = set(pv.discovered)
            assert oracle <= got, f"seed {seed}: {pid} missed {sorted(oracle - got)}"
            stray = got - oracle - inst.faulty
            assert not stray, f"seed {seed}: {pid} included {sorted(stray)}"
            entry = next(e for e in verdict.acceptance_log if e.process == pid)
            assert entry.time <= verdict.horizon
        runs += 1
    elapsed = time.monotonic() - start
    report(
        "criterion 4 (sink discovery, known threshold)", runs == 100, elapsed,
        300.0, f"{runs} adversarial runs",
    )


def test_criterion_5_core_discovery_and_consensus():
    start = time.monotonic()
    rng = random.Random(0x7E0589)
    runs = 0
    for seed in range(100):
        f = rng.choice([1, 1, 2])
        n = rng.randint(max(7, 3 * f + 2), 11)
        inst = generate(GenParams(n, f, "cupft", extra_edge_density=1.0), seed)
        scenario = scenario_for_instance(
            inst, "unknownF", seed, f_inner_rule="floorThird"
        )
        verdict = run(scenario)
        assert verdict.oracle_core is not None, f"seed {seed}: no unique oracle core"
        core_correct = set(verdict.oracle_core[0]) & scenario.correct()
        for pid, pv in verdict.per_process.items():
            assert pv.discovered is not None, f"seed {seed}: {pid} never identified"
            got = set(pv.discovered) & scenario.correct()
            assert got == core_correct, (
                f"seed {seed}: {pid} returned {sorted(got)} != {sorted(core_correct)}"
            )
        assert verdict.validity, f"seed {seed}: validity"
        assert verdict.agreement, f"seed {seed}: agreement"
        assert verdict.termination, f"seed {seed}: termination"
        runs += 1
    elapsed = time.monotonic() - start
    report(
        "criterion 5 (core discovery and consensus, unknown threshold)",
        runs == 100, elapsed, 300.0, f"{runs} runs",
    )


def test_criterion_6_split_brain_regression():
    start = time.monotonic()
    scenario = twin_core_split_scenario(seed=7)
    verdict = run(scenario)
    ok = not verdict.agreement
    ok = ok and verdict.validity and verdict.termination
    values = verdict.decided_values()
    ok = ok and sorted(values) == ["alpha", "bravo"]
    identified = {
        frozenset(e.members_r) | frozenset(e.kstar) for e in verdict.acceptance_log
    }
    side_a, side_b = frozenset({1, 2, 3, 4}), frozenset({5, 6, 7, 8})
    ok = ok and identified == {side_a, side_b}
    ok = ok and not (side_a & side_b)
    again = run(scenario)
    ok = ok and again.trace_digest == verdict.trace_digest
    ok = ok and again.to_dict() == verdict.to_dict()
    elapsed = time.monotonic() - start
    report(
        "criterion 6 (split-brain regression)", ok, elapsed, 10.0,
        f"decided {values}",
    )


def test_criterion_7_inner_consensus_suite():
    start = time.monotonic()
    members = (4, 9, 14, 21)
    assert quorum_size(len(members), 1) == 3  # ceil((4+1+1)/2)
    byz = leader_of(0, members)
    splits = 0
    stalls = 0
    for seed in range(50):
        net, instances = build_cluster(list(members), byzantine=[byz], seed=seed)
        decided = run_to_decision(net, instances)
        if any(v is None for v in decided.values()):
            stalls += 1
        elif len(set(decided.values())) != 1:
            splits += 1
    ok = splits == 0 and stalls == 0
    elapsed = time.monotonic() - start
    report(
        "criterion 7 (inner consensus with equivocating leader)", ok, elapsed,
        30.0, f"50 seeds, {splits} splits, {stalls} stalls",
    )


def test_criterion_8_determinism():
    start = time.monotonic()
    rng = random.Random(0xDE7)
    scenarios = [twin_core_split_scenario(seed=3)]
    g, satellite_faulty = twin_core_graph()
    for seed in range(9):
        inst = generate(GenParams(rng.randint(6, 10), 1, "cup"), seed)
        scenarios.append(scenario_for_instance(inst, "knownF", seed))
    for seed in range(10):
        inst = generate(GenParams(rng.randint(7, 10), 1, "cupft"), seed)
        scenarios.append(
            scenario_for_instance(inst, "unknownF", seed, f_inner_rule="floorThird")
        )
    ok = True
    for scenario in scenarios:
        first = run(scenario)
        second = run(scenario)
        ok = ok and first.trace_digest == second.trace_digest
        ok = ok and first.to_dict() == second.to_dict()
    elapsed = time.monotonic() - start
    report(
        "criterion 8 (determinism)", ok and len(scenarios) == 20, elapsed, 60.0,
        f"{len(scenarios)} scenarios run twice",
    )


def test_criterion_9_literal_guards():
    start = time.monotonic()
    authority = SigningAuthority(salt=77)

    # Guard one: a record batch lacking the sender's own verifying record is
    # ignored wholesale, even when every included record verifies.
    key1 = authority.register(1)
    config = ProcessConfig(mode="knownF", f=1, proposal="x")
    proc = Process(1, frozenset({2, 3}), config, authority, key1)
    other = authority.sign_pd(authority.register(3), 3, {1, 2})
    before = (set(proc.view.s_pd), set(proc.view.s_known), set(proc.view.s_received))
    proc.on_deliver(5, 2, SetPds((other,)))
    after = (set(proc.view.s_pd), set(proc.view.s_known), set(proc.view.s_received))
    ok = before == after

    # Guard two: no acceptance ever carries fewer than f+2 members in R.
    rng = random.Random(31337)
    acceptances = 0
    for trial in range(150):
        f = rng.randint(0, 2)
        ids = rng.sample(range(1, 12), rng.randint(2, 7))
        me = ids[0]
        cfg = ProcessConfig(mode="knownF", f=f, proposal="x")
        me_key = authority.register(me)
        pd = frozenset(rng.sample(ids, rng.randint(1, len(ids)))) - {me}
        p = Process(me, pd, cfg, authority, me_key)
        for owner in ids[1:]:
            claimed = frozenset(rng.sample(ids, rng.randint(1, len(ids)))) - {owner}
            rec = authority.sign_pd(authority.register(owner), owner, claimed)
            p.view.merge_records(owner, (rec,), authority)
        hit = sink_check(p.view, f)
        if hit is not None:
            acceptances += 1
            ok = ok and len(hit.members_r) >= f + 2
    elapsed = time.monotonic() - start
    report(
        "criterion 9 (literal guards)", ok, elapsed, 30.0,
        f"{acceptances} acceptances inspected",
    )

"""Scenario execution and property verdicts.

``run`` drives one scenario to decision quiescence or the horizon, then
scores Validity, Agreement, and Termination over the correct processes and
compares every discovery result against the ground-truth oracles computed
on the safe subgraph.  ``sweep`` repeats a base scenario across seeds and
aggregates pass rates and decision-time percentiles.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .adversary import ByzantineDriver
from .auth import SigningAuthority
from .graphs import ProcessId, safe_subgraph
from .messages import value_digest
from .protocol import Process, ProcessConfig
from .scenario import Scenario, resolve_pre_rule, resolve_valid
from .simnet import DelayPolicy, Network
from .validation import enumerate_cores, sink_of

GST_SAMPLE_RANGE = 500
HORIZON_FACTOR = 50


@dataclass(frozen=True)
class ProcessVerdict:
    discovered: Optional[Tuple[ProcessId, ...]]
    y: Optional[int]
    decided: Optional[object]
    decide_time: Optional[int]


@dataclass(frozen=True)
class AcceptanceEntry:
    process: ProcessId
    time: int
    members_r: Tuple[ProcessId, ...]
    kstar: Tuple[ProcessId, ...]
    y: int


@dataclass
class Verdict:
    per_process: Dict[ProcessId, ProcessVerdict]
    validity: bool
    agreement: bool
    termination: bool
    oracle_sink: Tuple[ProcessId, ...]
    oracle_core: Optional[Tuple[Tuple[ProcessId, ...], int]]
    acceptance_log: List[AcceptanceEntry]
    trace_digest: str
    gst: int
    horizon: int
    notes: List[str] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return self.validity and self.agreement and self.termination

    def decided_values(self) -> List[object]:
        seen = {}
        for pv in self.per_process.values():
            if pv.decided is not None:
                seen[value_digest(pv.decided)] = pv.decided
        return [seen[d] for d in sorted(seen)]

    def to_dict(self) -> dict:
        return {
            "perProcess": {
                str(pid): {
                    "discovered": list(pv.discovered) if pv.discovered else None,
                    "y": pv.y,
                    "decided": pv.decided,
                    "decideTime": pv.decide_time,
                }
                for pid, pv in sorted(self.per_process.items())
            },
            "validity": self.validity,
            "agreement": self.agreement,
            "termination": self.termination,
            "oracleSink": list(self.oracle_sink),
            "oracleCore": (
                {"members": list(self.oracle_core[0]), "y": self.oracle_core[1]}
                if self.oracle_core
                else None
            ),
            "acceptanceLog": [
                {
                    "process": e.process,
                    "time": e.time,
                    "r": list(e.members_r),
                    "kstar": list(e.kstar),
                    "y": e.y,
                }
                for e in self.acceptance_log
            ],
            "traceDigest": self.trace_digest,
            "gst": self.gst,
            "horizon": self.horizon,
            "notes": list(self.notes),
        }


def run(scenario: Scenario, collect_trace: bool = False):
    """Execute one scenario; returns the Verdict (plus trace lines if asked)."""
    rng = random.Random(scenario.seed)
    gst = scenario.gst if scenario.gst is not None else rng.randint(0, GST_SAMPLE_RANGE)
    n = len(scenario.graph.vertices)
    horizon = (
        scenario.horizon
        if scenario.horizon is not None
        else gst + HORIZON_FACTOR * scenario.delta * n
    )
    correct = scenario.correct()
    authority = SigningAuthority(salt=scenario.seed * 2_654_435_761 + 1)
    policy = DelayPolicy(
        gst=gst,
        delta=scenario.delta,
        pre_rule=resolve_pre_rule(scenario.pre_rule),
        correct=correct,
    )
    net = Network(policy, rng)
    valid = resolve_valid(scenario.valid_spec)

    machines: Dict[ProcessId, Process] = {}
    notes: List[str] = []
    for pid in sorted(scenario.graph.vertices):
        pd = scenario.graph.successors(pid)
        key = authority.register(pid)
        config = ProcessConfig(
            mode=scenario.mode,
            f=scenario.f if scenario.mode == "knownF" else None,
            proposal=scenario.proposals.get(pid, f"val-{pid}"),
            valid=valid,
            discovery_period=scenario.discovery_period,
            inner_timeout_base=scenario.inner_timeout_base,
            f_inner_rule=scenario.f_inner_rule,
        )
        if pid in scenario.faulty:
            driver = ByzantineDriver(
                pid,
                frozenset(pd),
                scenario.faulty[pid],
                config,
                authority,
                key,
                random.Random(scenario.seed * 31 + pid),
            )
            net.register(pid, driver)
        else:
            proc = Process(pid, frozenset(pd), config, authority, key)
            machines[pid] = proc
            net.register(pid, proc)

    net.start_all()
    net.run(horizon, stop=lambda: all(p.val is not None for p in machines.values()))

    for pid in sorted(machines):
        if machines[pid].config_error:
            notes.append(f"configuration-error process {pid}: {machines[pid].config_error}")

    verdict = _score(scenario, machines, net, gst, horizon, notes)
    if collect_trace:
        return verdict, list(net.trace)
    return verdict


def _score(
    scenario: Scenario,
    machines: Dict[ProcessId, Process],
    net: Network,
    gst: int,
    horizon: int,
    notes: List[str],
) -> Verdict:
    safe = safe_subgraph(scenario.graph, scenario.faulty)
    oracle_sink = tuple(sorted(sink_of(safe)))
    oracle_core = None
    try:
        cores = enumerate_cores(safe, scenario.enumeration_cap)
        if len(cores) == 1 and cores[0].members <= frozenset(oracle_sink):
            oracle_core = (tuple(sorted(cores[0].members)), cores[0].y_min)
    except ValueError as exc:
        notes.append(f"core oracle skipped: {exc}")

    per: Dict[ProcessId, ProcessVerdict] = {}
    log: List[AcceptanceEntry] = []
    for pid, proc in sorted(machines.items()):
        discovered = (
            tuple(sorted(proc.outcome.members)) if proc.outcome is not None else None
        )
        per[pid] = ProcessVerdict(
            discovered=discovered,
            y=proc.outcome.y if proc.outcome is not None else None,
            decided=proc.val,
            decide_time=proc.decide_time,
        )
        if proc.acceptance is not None:
            log.append(
                AcceptanceEntry(
                    pid,
                    proc.accept_time,
                    tuple(sorted(proc.acceptance.members_r)),
                    tuple(sorted(proc.acceptance.kstar)),
                    proc.acceptance.y,
                )
            )
    log.sort(key=lambda e: (e.time, e.process))

    valid = resolve_valid(scenario.valid_spec)
    proposal_digests = {value_digest(v) for v in scenario.proposals.values()}
    decided = [pv.decided for pv in per.values() if pv.decided is not None]
    validity = all(
        valid(v) and value_digest(v) in proposal_digests for v in decided
    )
    digests = {value_digest(v) for v in decided}
    agreement = len(digests) <= 1
    termination = bool(per) and all(pv.decided is not None for pv in per.values())
    return Verdict(
        per_process=per,
        validity=validity,
        agreement=agreement,
        termination=termination,
        oracle_sink=oracle_sink,
        oracle_core=oracle_core,
        acceptance_log=log,
        trace_digest=net.trace_digest(),
        gst=gst,
        horizon=horizon,
        notes=notes,
    )


# -- sweeps ---------------------------------------------------------------------


@dataclass
class SweepReport:
    seeds: List[int]
    validity_rate: float
    agreement_rate: float
    termination_rate: float
    pass_rate: float
    decide_time_p50: Optional[float]
    decide_time_p90: Optional[float]
    decide_time_max: Optional[int]
    failures: List[int]
    verdicts: Dict[int, Verdict]

    def to_dict(self) -> dict:
        return {
            "seeds": self.seeds,
            "validityRate": self.validity_rate,
            "agreementRate": self.agreement_rate,
            "terminationRate": self.termination_rate,
            "passRate": self.pass_rate,
            "decideTimeP50": self.decide_time_p50,
            "decideTimeP90": self.decide_time_p90,
            "decideTimeMax": self.decide_time_max,
            "failures": self.failures,
        }


def _run_seed(args: Tuple[Scenario, int]) -> Tuple[int, Verdict]:
    base, seed = args
    return seed, run(base.with_seed(seed))


def sweep(base: Scenario, seeds: Sequence[int], jobs: int = 1) -> SweepReport:
    """Run each seed independently and aggregate property pass rates."""
    pairs = [(base, s) for s in seeds]
    if jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(_run_seed, pairs))
    else:
        results = dict(map(_run_seed, pairs))

    verdicts = {s: results[s] for s in seeds}
    count = len(seeds)
    if count == 0:
        return SweepReport([], 1.0, 1.0, 1.0, 1.0, None, None, None, [], {})
    decide_times = [
        pv.decide_time
        for v in verdicts.values()
        for pv in v.per_process.values()
        if pv.decide_time is not None
    ]
    rate = lambda pick: sum(1 for v in verdicts.values() if pick(v)) / count
    return SweepReport(
        seeds=list(seeds),
        validity_rate=rate(lambda v: v.validity),
        agreement_rate=rate(lambda v: v.agreement),
        termination_rate=rate(lambda v: v.termination),
        pass_rate=rate(lambda v: v.all_pass),
        decide_time_p50=_percentile(decide_times, 0.50),
        decide_time_p90=_percentile(decide_times, 0.90),
        decide_time_max=max(decide_times) if decide_times else None,
        failures=[s for s in seeds if not verdicts[s].all_pass],
        verdicts=verdicts,
    )


def _percentile(values: List[int], q: float) -> Optional[float]:
    if not values:
        return None
    ordered = sorted(values)
    pos = q * (len(ordered) - 1)
    lo = int(pos)
    hi = min(lo + 1, len(ordered) - 1)
    frac = pos - lo
    return ordered[lo] * (1 - frac) + ordered[hi] * frac

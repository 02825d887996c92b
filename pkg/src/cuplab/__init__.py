"""Deterministic simulation lab for Byzantine consensus with unknown participants."""

from .auth import Authenticator, AuthorityViolation, SignedPD, SigningAuthority
from .gen import GenParams, GeneratedInstance, GenerationError, generate
from .graphs import (
    Condensation,
    KnowledgeGraph,
    ProcessId,
    complete_graph,
    condense,
    disjoint_paths,
    implies_k,
    kappa,
    parse_adjacency_text,
    safe_subgraph,
)
from .harness import SweepReport, Verdict, run, sweep
from .protocol import DiscoveryOutcome, LocalView, Process, ProcessConfig, core_check, sink_check
from .scenario import Scenario, load_scenario, save_scenario
from .validation import (
    CoreCandidate,
    CoreCertificate,
    FailedClause,
    ValidationReport,
    check_bft_cup,
    check_bft_cupft,
    enumerate_cores,
    is_extended_k_osr,
    is_k_osr,
    sink_of,
)

__version__ = "0.1.0"

__all__ = [
    "Authenticator",
    "AuthorityViolation",
    "Condensation",
    "CoreCandidate",
    "CoreCertificate",
    "DiscoveryOutcome",
    "FailedClause",
    "GenParams",
    "GeneratedInstance",
    "GenerationError",
    "KnowledgeGraph",
    "LocalView",
    "Process",
    "ProcessConfig",
    "ProcessId",
    "Scenario",
    "SignedPD",
    "SigningAuthority",
    "SweepReport",
    "ValidationReport",
    "Verdict",
    "check_bft_cup",
    "check_bft_cupft",
    "complete_graph",
    "condense",
    "core_check",
    "disjoint_paths",
    "enumerate_cores",
    "generate",
    "implies_k",
    "is_extended_k_osr",
    "is_k_osr",
    "kappa",
    "load_scenario",
    "parse_adjacency_text",
    "run",
    "safe_subgraph",
    "save_scenario",
    "sink_check",
    "sink_of",
    "sweep",
]

"""hetflow: run dataflow pipelines on a mixed fleet of virtual processors.

Pipelines are graphs of typed shells; each shell has one or more candidate
implementations labelled with a hierarchical compatibility tag and a resource
demand. Processors advertise an accepted tag and a capacity ledger. The
matcher assigns implementations to processors (a processor's tag must be an
ancestor of, or equal to, the implementation's tag, and the demand must fit
the remaining capacity), the runtime executes the graph over bounded blocking
channels, and the control service exposes the whole platform over HTTP.
"""

from .errors import (
    BadDefinitionError,
    BadManifestError,
    BadTagError,
    CommitFailedError,
    CycleError,
    DuplicateIdError,
    InvalidGraphError,
    InvalidStateError,
    NotDeployableError,
    NotFoundError,
    PlanInfeasibleError,
    PlatformError,
    PutAfterCloseError,
    StaleHandleError,
    UnknownIdError,
)
from .graph import DataflowGraph, Edge, Implementation, PortSpec, Shell, Violation
from .matcher import (
    DeploymentPlan,
    InfeasibilityReport,
    Rejection,
    commit_plan,
    match_one,
    ordered_candidates,
    plan_graph,
)
from .pipeline_io import load_pipeline, load_pipeline_file
from .registry import DeploymentHandle, HamManifest, Registry, VirtualProcessor, demand_fits
from .runtime import (
    Channel,
    END_OF_STREAM,
    RunSession,
    Token,
    session_stats,
    start_run,
    stop_run,
)
from .service import Platform, create_app
from .tags import Tag, TagIndex, format_tag, is_ancestor_or_equal, parse_tag, specificity

__version__ = "0.1.0"

__all__ = [
    "BadDefinitionError",
    "BadManifestError",
    "BadTagError",
    "Channel",
    "CommitFailedError",
    "CycleError",
    "DataflowGraph",
    "DeploymentHandle",
    "DeploymentPlan",
    "DuplicateIdError",
    "Edge",
    "END_OF_STREAM",
    "HamManifest",
    "Implementation",
    "InfeasibilityReport",
    "InvalidGraphError",
    "InvalidStateError",
    "NotDeployableError",
    "NotFoundError",
    "PlanInfeasibleError",
    "Platform",
    "PlatformError",
    "PortSpec",
    "PutAfterCloseError",
    "Registry",
    "Rejection",
    "RunSession",
    "Shell",
    "StaleHandleError",
    "Tag",
    "TagIndex",
    "Token",
    "UnknownIdError",
    "Violation",
    "VirtualProcessor",
    "commit_plan",
    "create_app",
    "demand_fits",
    "format_tag",
    "is_ancestor_or_equal",
    "load_pipeline",
    "load_pipeline_file",
    "match_one",
    "ordered_candidates",
    "parse_tag",
    "plan_graph",
    "session_stats",
    "specificity",
    "start_run",
    "stop_run",
]

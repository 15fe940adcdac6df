"""CRALA: a textual architecture description toolchain for cloud robotic
systems, covering three abstraction levels (specification, configuration,
assembly), their validation and refinement, capability matchmaking,
deployment planning and failure simulation."""

from .matchmaker import (
    MatchResult,
    Repository,
    RepositoryEntry,
    RepositoryError,
    load_repository,
    match_role,
)
from .model import (
    Assembly,
    CloudDescription,
    ComponentImplementation,
    ComponentInstance,
    ComponentRole,
    ConceptRobot,
    Configuration,
    Connection,
    ConnectionEnd,
    ConnectionFlavor,
    Diagnostic,
    Direction,
    Document,
    EndKind,
    ImplVariant,
    InstanceState,
    InterfaceRef,
    Level,
    NetworkMode,
    PhysicalMachine,
    RobotModel,
    SchedulerKind,
    SensorSpec,
    ActuatorSpec,
    Severity,
    SourceSpan,
    Specification,
    VirtualMachine,
    VmPlacement,
)
from .parser import ParseResult, parse
from .pipeline import CheckResult, check_files, check_sources
from .planner import (
    DeploymentMetrics,
    FailureEvent,
    FailureTargetKind,
    FlatNetworkConflict,
    ImpactReport,
    InsufficientCapacity,
    PlanningError,
    evaluate_metrics,
    plan_deployment,
    simulate_failure,
)
from .printer import format_document, format_documents
from .refinement import (
    Binding,
    RefinementReport,
    VariabilityGraph,
    build_variability_graph,
    check_assembly_deploys_config,
    check_config_refines_spec,
)
from .validate import (
    validate_assembly,
    validate_configuration,
    validate_specification,
)
from .workspace import AmbiguousReferenceError, Workspace, build_workspace, resolve

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

"""Toolkit for the RAMP robotic assembly benchmark: XML goal configurations,
two-resolution task planning over action-language domains, discrete-event
skill simulation with seeded failure models, and the five-repeat evaluation
protocol with completion-vs-time metrics."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    BeamSpec,
    Connection,
    GoalConfiguration,
    JointKind,
    JointRef,
    JointSpec,
    SatisfactionReport,
    WorldState,
    apply_event,
    satisfaction,
    validate_goal,
)
from .goals import AssemblyCatalog, LayoutTemplate, load_catalog, parse_goal, serialize_goal  # noqa: F401
from .action_language import (  # noqa: F401
    GroundedDomain,
    SymbolicState,
    SystemDescription,
    applicable,
    ground,
    parse_description,
    successor,
)
from .planning import CoarsePlan, FinePlan, History, bfs_oracle, plan, plan_coarse, refine_transition, zoom  # noqa: F401
from .simulator import ExecutionTrace, SimConfig, SkillModel, execute, load_config, replay  # noqa: F401
from .harness import BenchmarkReport, TrialResult, curve_stats, emit_report, run_protocol  # noqa: F401

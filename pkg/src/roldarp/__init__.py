"""Segmented Best Path for revenue online dial-a-ride, with exact baselines and checkers."""
from .core import (
    Idle,
    Instance,
    MetricGraph,
    Move,
    Request,
    RevenueProfile,
    RoldarpError,
    Schedule,
    SegmentClock,
    Serve,
    metric_closure,
    revenue_profile,
    validate_instance,
    validate_schedule,
)
from .oracle import optimal_offline
from .sbp import SBPPolicy, run_sbp

__all__ = [
    "Idle", "Instance", "MetricGraph", "Move", "Request", "RevenueProfile", "RoldarpError",
    "Schedule", "SegmentClock", "Serve", "metric_closure", "optimal_offline", "revenue_profile",
    "run_sbp", "SBPPolicy", "validate_instance", "validate_schedule",
]
__version__ = "0.1.0"

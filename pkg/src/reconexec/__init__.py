"""Hybrid software/hardware callback executor on a simulated reconfigurable fabric."""

from __future__ import annotations

from .bus import Message, MessageBus, ReadySet
from .clock import MS, NS, SECOND, US, Timer, VirtualClock, WallClock
from .executor import (
    ExecutionRecord,
    ExecutorConfig,
    ReconExecutor,
    StandardExecutor,
    StopCondition,
    recon_executor_init,
)
from .fabric import Fabric, ReconfigModel, SlotDescriptor, fit_model, reconfig_time
from .registry import CallbackKind, CallbackLists, InvalidMask, ResourceMask
from .runtime import SimDriver, ThreadDriver
from .scenario import ScenarioConfig, load_config, parse_config, run_scenario, summarize
from .workloads import WorkModel, builtin_workloads

__version__ = "0.1.0"

__all__ = [
    "CallbackKind", "CallbackLists", "ExecutionRecord", "ExecutorConfig", "Fabric", "InvalidMask",
    "Message", "MessageBus", "MS", "NS", "ReadySet", "ReconExecutor", "ReconfigModel", "ResourceMask",
    "SECOND", "ScenarioConfig", "SimDriver", "SlotDescriptor", "StandardExecutor", "StopCondition",
    "ThreadDriver", "Timer", "US", "VirtualClock", "WallClock", "WorkModel", "builtin_workloads",
    "fit_model", "load_config", "parse_config", "reconfig_time", "recon_executor_init", "run_scenario",
    "summarize",
]

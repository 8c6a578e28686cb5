"""离散事件仿真核心模块"""

from .engine import Component, Engine, Event, EventKind, RunSummary, SimTime
from .errors import SimError

__all__ = [
    "Component",
    "Engine",
    "Event",
    "EventKind",
    "RunSummary",
    "SimTime",
    "SimError",
]

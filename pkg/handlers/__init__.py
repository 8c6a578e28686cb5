"""场景与参数扫描处理器模块"""

from .scenario_handler import ScenarioHandler
from .sweep_handler import SweepHandler

__all__ = ["ScenarioHandler", "SweepHandler"]

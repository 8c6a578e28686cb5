"""配置、场景与扫描文件解析模块"""

from .config_parser import ConfigParser
from .scenario_parser import RunBenchmark, Scenario, ScenarioParser
from .sweep_parser import SweepParser, SweepSpec

__all__ = ["ConfigParser", "RunBenchmark", "Scenario", "ScenarioParser", "SweepParser", "SweepSpec"]

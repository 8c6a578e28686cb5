"""报告构建模块"""

from .report_builder import RATIO_COLUMNS, ReportBuilder

__all__ = ["RATIO_COLUMNS", "ReportBuilder"]

"""工具模块"""

from .json_loader import load_json_file, load_json_text, validate_model
from .logger import RunLogger, setup_logging
from .trace import TraceWriter

__all__ = [
    "RunLogger",
    "TraceWriter",
    "load_json_file",
    "load_json_text",
    "setup_logging",
    "validate_model",
]

"""提前退出工作负载：熵判定、模型描述、退出策略与基准运行"""

from .entropy import entropy_rows, normalized_entropy
from .confidence import ConfidenceSource, DirichletConfidence, FixedConfidence, TraceConfidence
from .model_spec import (
    ExitMode,
    ExitPolicy,
    LayerMapping,
    LayerSpec,
    ModelSpec,
    available_fixtures,
    load_model_fixture,
    should_exit,
)
from .benchmark import (
    BenchmarkMode,
    BenchmarkResult,
    ExitOutcome,
    Ratios,
    compare,
    expected_cost,
    run_benchmark,
)

__all__ = [
    "BenchmarkMode",
    "BenchmarkResult",
    "ConfidenceSource",
    "DirichletConfidence",
    "ExitMode",
    "ExitOutcome",
    "ExitPolicy",
    "FixedConfidence",
    "LayerMapping",
    "LayerSpec",
    "ModelSpec",
    "Ratios",
    "TraceConfidence",
    "available_fixtures",
    "compare",
    "entropy_rows",
    "expected_cost",
    "load_model_fixture",
    "normalized_entropy",
    "run_benchmark",
    "should_exit",
]

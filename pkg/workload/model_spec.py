#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
提前退出网络的抽象描述

ModelSpec 把网络抽象成按序执行的层（CPU 周期数 + 可选的加速器元素数），
在 exit_after 层之后有一个退出头；ExitPolicy 决定每个样本是否在退出头结束。
"""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from utils.json_loader import load_json_file
from sim.errors import ConfigError, FileFormatError
from workload.confidence import ConfidenceSource, describe_source
from workload.entropy import entropy_rows, exits_below

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "models"


class LayerMapping(str, Enum):
    """层映射：全部在 CPU 上，或可加速的层卸载到加速器"""

    CPU = "cpu"
    ACCEL = "accel"


class LayerSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    label: str
    cpu_cycles: int = Field(ge=0)
    accel_element_count: Optional[int] = Field(None, ge=0)
    # 数据相关的开关活动度，同时作用于 CPU 和加速器的动态能耗
    activity: float = Field(1.0, ge=0)


class ModelSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    layers: List[LayerSpec] = Field(min_length=1)
    exit_after: int = 0
    exit_head_cycles: int = Field(0, ge=0)
    metadata: Dict[str, Any] = {}

    @model_validator(mode="after")
    def _check_exit(self) -> "ModelSpec":
        if not 0 <= self.exit_after < len(self.layers):
            raise ValueError(f"exit_after {self.exit_after} outside 0..{len(self.layers) - 1}")
        return self

    @property
    def pre_exit_layers(self) -> List[LayerSpec]:
        return self.layers[: self.exit_after + 1]

    @property
    def post_exit_layers(self) -> List[LayerSpec]:
        return self.layers[self.exit_after + 1:]

    @property
    def full_cycles(self) -> int:
        """不退出时的总 CPU 周期（包含退出头）"""
        return sum(layer.cpu_cycles for layer in self.layers) + self.exit_head_cycles

    @property
    def pre_exit_cycles(self) -> int:
        return sum(layer.cpu_cycles for layer in self.pre_exit_layers) + self.exit_head_cycles

    @property
    def pre_exit_fraction(self) -> float:
        """f = 到退出头为止的代价 / 总代价"""
        return self.pre_exit_cycles / self.full_cycles


def load_model_fixture(name: str) -> ModelSpec:
    """
    读取随仓库发布的模型（fixtures/models/<name>.json）

    Raises:
        ConfigError: 没有这个模型
        FileFormatError: 文件格式错误
    """
    path = FIXTURE_DIR / f"{name}.json"
    if not path.is_file():
        raise ConfigError(f"unknown model fixture {name!r}")
    data = load_json_file(path)
    try:
        return ModelSpec.model_validate(data)
    except ValueError as e:
        raise FileFormatError(str(e), source=str(path)) from None


def available_fixtures() -> List[str]:
    return sorted(p.stem for p in FIXTURE_DIR.glob("*.json"))


class ExitMode(str, Enum):
    FIXED_RATE = "fixed-rate"
    ENTROPY = "entropy"
    TRACE = "trace"


class ExitPolicy(BaseModel):
    """
    退出策略

    FixedRate(p, seed): 每个样本以概率 p 退出，同一种子结果相同；
    Entropy(τ, source): 置信度分布的归一化熵 < τ 时退出；
    Trace(file): 从文件读取每个样本的退出决定。
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: ExitMode
    p: Optional[float] = Field(None, ge=0, le=1)
    threshold: Optional[float] = Field(None, ge=0, le=1)
    seed: int = 0
    confidence: Optional[ConfidenceSource] = None
    trace_file: Optional[str] = None

    @model_validator(mode="after")
    def _check_mode(self) -> "ExitPolicy":
        if self.mode is ExitMode.FIXED_RATE and self.p is None:
            raise ValueError("fixed-rate policy needs p")
        if self.mode is ExitMode.ENTROPY and (self.threshold is None or self.confidence is None):
            raise ValueError("entropy policy needs threshold and confidence")
        if self.mode is ExitMode.TRACE and not self.trace_file:
            raise ValueError("trace policy needs trace_file")
        return self

    @classmethod
    def fixed_rate(cls, p: float, seed: int = 0) -> "ExitPolicy":
        return cls(mode=ExitMode.FIXED_RATE, p=p, seed=seed)

    @classmethod
    def entropy(cls, threshold: float, confidence: ConfidenceSource, seed: int = 0) -> "ExitPolicy":
        return cls(mode=ExitMode.ENTROPY, threshold=threshold, confidence=confidence, seed=seed)

    @classmethod
    def trace(cls, trace_file: str) -> "ExitPolicy":
        return cls(mode=ExitMode.TRACE, trace_file=trace_file)

    def with_seed(self, seed: int) -> "ExitPolicy":
        return self.model_copy(update={"seed": seed})

    def decisions(self, n: int, start: int = 0) -> np.ndarray:
        """
        前 n 个样本的退出决定

        Args:
            n: 样本数
            start: 样本起始序号（trace 模式按序号取值）
        """
        if self.mode is ExitMode.FIXED_RATE:
            rng = np.random.default_rng(self.seed)
            return rng.random(n) < self.p
        if self.mode is ExitMode.ENTROPY:
            return entropy_rows(self.confidence.sample(n, self.seed)) < self.threshold
        return self._trace_decisions(n, start)

    def _trace_decisions(self, n: int, start: int) -> np.ndarray:
        data = load_json_file(Path(self.trace_file))
        if not isinstance(data, list) or not all(isinstance(v, (bool, int)) for v in data):
            raise FileFormatError("exit trace must be a list of booleans", source=self.trace_file)
        if start + n > len(data):
            raise ConfigError(f"exit trace has {len(data)} decisions, {start + n} needed")
        return np.asarray(data[start:start + n], dtype=bool)

    def exit_probability(self, n: int) -> float:
        """期望值模式使用的退出概率；非固定概率策略取前 n 个样本的经验值"""
        if self.mode is ExitMode.FIXED_RATE:
            return float(self.p)
        return float(np.mean(self.decisions(n)))

    def describe(self) -> str:
        if self.mode is ExitMode.FIXED_RATE:
            return f"FixedRate(p={self.p:g}, seed={self.seed})"
        if self.mode is ExitMode.ENTROPY:
            return f"Entropy(tau={self.threshold:g}, {describe_source(self.confidence)})"
        return f"Trace({self.trace_file})"


def should_exit(probs, policy: ExitPolicy) -> bool:
    """
    熵策略下的单样本判定：normalized_entropy(probs) < τ

    Raises:
        ConfigError: 策略不是熵模式
        DomainError: 分布不合法
    """
    if policy.mode is not ExitMode.ENTROPY:
        raise ConfigError(f"should_exit needs an entropy policy, got {policy.mode.value}")
    return exits_below(probs, policy.threshold)

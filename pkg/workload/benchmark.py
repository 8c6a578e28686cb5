#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
提前退出基准

每个样本只有两条可能的执行路径：在退出头结束（exited），或跑完全部层（full）。
一条路径的仿真结果只取决于路径本身，所以两条路径各仿真一次：
- 期望值模式：按退出概率 p 加权两条路径
- 随机模式：逐样本抽取退出决定，再查路径结果
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

from config.platform_config import PlatformConfig
from energy.ledger import EnergyLedger, accrue
from energy.models import DynamicCostTable, LeakageModel
from hw.cpu import Compute, Directive, Offload
from hw.soc import Soc
from sim.engine import RunSummary
from sim.errors import ConfigError
from workload.model_spec import ExitPolicy, LayerMapping, LayerSpec, ModelSpec

logger = logging.getLogger(__name__)


class BenchmarkMode(str, Enum):
    EXPECTED = "expected-value"
    STOCHASTIC = "stochastic"


def _accelerated(layer: LayerSpec, mapping: LayerMapping) -> bool:
    return mapping is LayerMapping.ACCEL and layer.accel_element_count is not None


def expected_cost(model: ModelSpec, p: float, mapping: LayerMapping = LayerMapping.CPU, speedup: float = 1.0) -> float:
    """
    每个样本的期望周期数（闭式解）

    C = pre + head + (1 - p) * post，映射到加速器的层按 1/s 缩放。
    CPU 映射且 s = 1 时即 [f + (1 - p)(1 - f)] * C_full。

    Raises:
        ConfigError: p 不在 [0, 1] 或 s <= 0
    """
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"exit rate {p} outside [0, 1]")
    if speedup <= 0:
        raise ConfigError(f"speedup must be positive, got {speedup}")

    def cost(layers: List[LayerSpec]) -> float:
        return sum(
            layer.cpu_cycles / speedup if _accelerated(layer, mapping) else layer.cpu_cycles
            for layer in layers
        )

    return cost(model.pre_exit_layers) + model.exit_head_cycles + (1.0 - p) * cost(model.post_exit_layers)


def layer_program(model: ModelSpec, mapping: LayerMapping, exited: bool, slot: int = 0) -> List[Directive]:
    """一条执行路径对应的CPU程序"""
    program: List[Directive] = []

    def emit(layer: LayerSpec) -> None:
        if _accelerated(layer, mapping):
            program.append(
                Offload(slot=slot, element_count=layer.accel_element_count, activity=layer.activity)
            )
        elif layer.cpu_cycles:
            program.append(Compute(cycles=layer.cpu_cycles, activity=layer.activity, label=layer.label))

    for layer in model.pre_exit_layers:
        emit(layer)
    if model.exit_head_cycles:
        program.append(Compute(cycles=model.exit_head_cycles, label="exit-head"))
    if not exited:
        for layer in model.post_exit_layers:
            emit(layer)
    return program


@dataclass
class PathResult:
    exited: bool
    cycles: int
    summary: RunSummary
    ledger: EnergyLedger

    @property
    def energy_j(self) -> float:
        return self.ledger.total_j


def simulate_path(
    model: ModelSpec,
    mapping: LayerMapping,
    exited: bool,
    config: PlatformConfig,
    costs: DynamicCostTable,
    slot: int = 0,
    trace=None,
) -> PathResult:
    """在一个新的平台实例上仿真一条路径，trace 为可选的事件轨迹写入器"""
    soc = Soc.build(config, trace)
    summary = soc.run(layer_program(model, mapping, exited, slot))
    ledger = accrue(summary, costs, LeakageModel.from_config(config), config.clock_hz)
    logger.debug("[OK] %s 路径(exited=%s) %d 周期", model.name, exited, summary.final_time)
    return PathResult(exited, summary.final_time, summary, ledger)


@dataclass(frozen=True)
class SampleOutcome:
    exited: bool
    cycles: int
    energy_j: float


@dataclass
class ExitOutcome:
    """汇总结果；随机模式下 per_sample 保存逐样本结果"""

    samples: int
    exited: int
    exit_rate: float
    mean_cycles: float
    mean_energy_j: float
    per_sample: List[SampleOutcome] = field(default_factory=list)


@dataclass
class BenchmarkResult:
    name: str
    model: ModelSpec
    policy: ExitPolicy
    mapping: LayerMapping
    mode: BenchmarkMode
    outcome: ExitOutcome
    ledger: EnergyLedger
    paths: Dict[str, PathResult]

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "model": self.model.name,
            "policy": self.policy.describe(),
            "mapping": self.mapping.value,
            "mode": self.mode.value,
            "samples": self.outcome.samples,
            "exited": self.outcome.exited,
            "exit_rate": self.outcome.exit_rate,
            "mean_cycles": self.outcome.mean_cycles,
            "mean_energy_j": self.outcome.mean_energy_j,
            "energy": self.ledger.to_dict(),
            "paths": {
                key: {"cycles": path.cycles, "energy_j": path.energy_j}
                for key, path in sorted(self.paths.items())
            },
            "metadata": dict(self.model.metadata),
        }


@dataclass(frozen=True)
class Ratios:
    """相对基线的内核级比值"""

    speedup: float
    energy_gain: float

    @property
    def power_ratio(self) -> float:
        """平均功率之比 = 加速比 / 能量收益"""
        return self.speedup / self.energy_gain


def compare(run: BenchmarkResult, baseline: BenchmarkResult) -> Ratios:
    return Ratios(
        speedup=baseline.outcome.mean_cycles / run.outcome.mean_cycles,
        energy_gain=baseline.outcome.mean_energy_j / run.outcome.mean_energy_j,
    )


def _weighted(exit_path: PathResult, full_path: PathResult, p: float) -> EnergyLedger:
    return exit_path.ledger.scaled(p).merged(full_path.ledger.scaled(1.0 - p))


def _path_key(exited: bool) -> str:
    return "exited" if exited else "full"


def run_benchmark(
    model: ModelSpec,
    policy: ExitPolicy,
    mapping: LayerMapping,
    samples: int,
    config: PlatformConfig,
    costs: Optional[DynamicCostTable] = None,
    mode: BenchmarkMode = BenchmarkMode.EXPECTED,
    shards: int = 1,
    slot: int = 0,
    name: str = "",
    trace=None,
) -> BenchmarkResult:
    """
    运行一个提前退出基准

    Args:
        model: 网络描述
        policy: 退出策略
        mapping: 层映射
        samples: 样本数 N
        config: 平台配置（加速器映射需要插槽里有加速器）
        costs: 动态单价表，缺省为随仓库发布的拟合值
        mode: 期望值模式或随机模式
        shards: 随机模式下的分片数，分片 i 使用种子 seed + i
        slot: 卸载目标插槽
        trace: 事件轨迹写入器，各条路径的仿真依次写入

    Returns:
        BenchmarkResult: 汇总结果与每样本平均能量账本

    Raises:
        ConfigError: 参数不合法
        SimError: 仿真过程中的错误（例如卸载到未上电的加速器）
    """
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    if shards < 1:
        raise ConfigError("shards must be >= 1")
    costs = costs or DynamicCostTable()
    name = name or f"{model.name}-{mapping.value}"
    logger.info("[SEND] 基准 %s: %s, %s, N=%d", name, policy.describe(), mode.value, samples)

    if mode is BenchmarkMode.EXPECTED:
        p = policy.exit_probability(samples)
        paths = {
            _path_key(exited): simulate_path(model, mapping, exited, config, costs, slot, trace)
            for exited in (True, False)
        }
        exit_path, full_path = paths["exited"], paths["full"]
        mean_cycles = p * exit_path.cycles + (1.0 - p) * full_path.cycles
        ledger = _weighted(exit_path, full_path, p)
        outcome = ExitOutcome(
            samples=samples,
            exited=round(p * samples),
            exit_rate=p,
            mean_cycles=mean_cycles,
            mean_energy_j=ledger.total_j,
        )
    else:
        per_sample: List[SampleOutcome] = []
        paths = {}
        bounds = [samples * i // shards for i in range(shards + 1)]
        for index in range(shards):
            start, stop = bounds[index], bounds[index + 1]
            if stop == start:
                continue
            decisions = policy.with_seed(policy.seed + index).decisions(stop - start, start)
            # 分片各自使用独立的仿真实例
            memo: Dict[bool, PathResult] = {}
            for decision in decisions:
                exited = bool(decision)
                if exited not in memo:
                    memo[exited] = simulate_path(model, mapping, exited, config, costs, slot, trace)
                path = memo[exited]
                per_sample.append(SampleOutcome(exited, path.cycles, path.energy_j))
            for exited, path in memo.items():
                paths.setdefault(_path_key(exited), path)

        exited_count = sum(1 for s in per_sample if s.exited)
        rate = exited_count / samples
        if "exited" in paths and "full" in paths:
            ledger = _weighted(paths["exited"], paths["full"], rate)
        else:
            ledger = next(iter(paths.values())).ledger
        outcome = ExitOutcome(
            samples=samples,
            exited=exited_count,
            exit_rate=rate,
            mean_cycles=sum(s.cycles for s in per_sample) / samples,
            mean_energy_j=sum(s.energy_j for s in per_sample) / samples,
            per_sample=per_sample,
        )

    logger.info("[OK] 基准 %s: 平均 %.1f 周期，退出率 %.4f", name, outcome.mean_cycles, outcome.exit_rate)
    return BenchmarkResult(name, model, policy, mapping, mode, outcome, ledger, paths)

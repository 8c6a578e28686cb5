#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
动态单价校准

目标是每个模型三种配置相对纯CPU基线的加速比和能量收益：
CPU 提前退出（cpu-ee）、不退出的卸载（offload）、卸载 + 提前退出（offload-ee）。

两步一维搜索（scipy minimize_scalar，有界）：
1. 固定其他单价，按 cpu-ee 的能量收益残差拟合 cpu_active_cycle；
2. 固定 cpu_active_cycle，按 offload 的能量收益残差拟合 accel_active_cycle。
周期数与单价无关，所以每条路径只仿真一次，搜索时只重新计价。
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import minimize_scalar

from config.platform_config import PlatformConfig
from energy.ledger import accrue
from energy.models import DynamicCostTable, LeakageModel
from sim.engine import RunSummary
from sim.errors import CalibrationInfeasible
from utils.json_loader import load_json_file, validate_model
from workload.benchmark import simulate_path
from workload.model_spec import LayerMapping, load_model_fixture

logger = logging.getLogger(__name__)

CONFIGURATIONS = ("cpu-ee", "offload", "offload-ee")


class RatioTarget(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    speedup: float = Field(gt=0)
    energy_gain: float = Field(gt=0)


class ModelTargets(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    p: float = Field(ge=0, le=1)
    cpu_ee: RatioTarget
    offload: RatioTarget
    offload_ee: RatioTarget

    def target(self, configuration: str) -> RatioTarget:
        return getattr(self, configuration.replace("-", "_"))


class CalibrationTargets(BaseModel):
    """
    校准目标文件

    platform 为相对目标文件的平台配置路径（需要一个加速器）；
    bounds 为两个单价的搜索区间（pJ）。
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    platform: Optional[str] = None
    tolerance: float = Field(0.10, gt=0)
    slot: int = 0
    cpu_bounds: Tuple[float, float] = (1.0, 200.0)
    accel_bounds: Tuple[float, float] = (1.0, 500.0)
    models: Dict[str, ModelTargets] = Field(min_length=1)


def load_targets(path: Union[str, Path]) -> CalibrationTargets:
    path = Path(path)
    targets = validate_model(CalibrationTargets, load_json_file(path), str(path))
    if targets.platform and not Path(targets.platform).is_absolute():
        targets = targets.model_copy(update={"platform": str(path.parent / targets.platform)})
    return targets


@dataclass
class _Case:
    """一种配置在一个模型上的两条路径"""

    p: float
    exit_summary: RunSummary
    full_summary: RunSummary

    @property
    def cycles(self) -> float:
        return self.p * self.exit_summary.final_time + (1.0 - self.p) * self.full_summary.final_time

    def energy_j(self, costs: DynamicCostTable, leak: LeakageModel, clock_hz: int) -> float:
        exit_j = accrue(self.exit_summary, costs, leak, clock_hz).total_j
        full_j = accrue(self.full_summary, costs, leak, clock_hz).total_j
        return self.p * exit_j + (1.0 - self.p) * full_j


@dataclass(frozen=True)
class RatioRow:
    model: str
    configuration: str
    metric: str
    target: float
    simulated: float

    @property
    def residual(self) -> float:
        return self.simulated / self.target - 1.0


@dataclass
class CalibrationResult:
    costs: DynamicCostTable
    rows: List[RatioRow]
    power_ratios: Dict[str, float]
    tolerance: float

    @property
    def worst_residual(self) -> float:
        return max(abs(r.residual) for r in self.rows)

    def to_dict(self) -> Dict:
        return {
            "costs": self.costs.model_dump(mode="json"),
            "ratios": [
                {
                    "model": r.model,
                    "configuration": r.configuration,
                    "metric": r.metric,
                    "target": r.target,
                    "simulated": r.simulated,
                    "residual": r.residual,
                }
                for r in self.rows
            ],
            "power_ratios": dict(sorted(self.power_ratios.items())),
            "tolerance": self.tolerance,
            "worst_residual": self.worst_residual,
            "level": "kernel",
        }


class Calibrator:
    """持有仿真结果，按候选单价重新计价"""

    def __init__(self, targets: CalibrationTargets, config: PlatformConfig, base: Optional[DynamicCostTable] = None):
        self.targets = targets
        self.config = config
        self.base = base or DynamicCostTable()
        self.leak = LeakageModel.from_config(config)
        self.cases: Dict[Tuple[str, str], _Case] = {}
        for name, model_targets in sorted(targets.models.items()):
            model = load_model_fixture(name)
            for configuration, mapping, p in (
                ("baseline", LayerMapping.CPU, 0.0),
                ("cpu-ee", LayerMapping.CPU, model_targets.p),
                ("offload", LayerMapping.ACCEL, 0.0),
                ("offload-ee", LayerMapping.ACCEL, model_targets.p),
            ):
                exit_path = simulate_path(model, mapping, True, config, self.base, targets.slot)
                full_path = simulate_path(model, mapping, False, config, self.base, targets.slot)
                self.cases[(name, configuration)] = _Case(p, exit_path.summary, full_path.summary)
        logger.info("[OK] 校准用仿真完成：%d 个用例", len(self.cases))

    def _costs(self, **prices: float) -> DynamicCostTable:
        return self.base.model_copy(update=prices)

    def speedup(self, model: str, configuration: str) -> float:
        return self.cases[(model, "baseline")].cycles / self.cases[(model, configuration)].cycles

    def energy_gain(self, model: str, configuration: str, costs: DynamicCostTable) -> float:
        clock = self.config.clock_hz
        baseline = self.cases[(model, "baseline")].energy_j(costs, self.leak, clock)
        return baseline / self.cases[(model, configuration)].energy_j(costs, self.leak, clock)

    def _energy_error(self, configuration: str, costs: DynamicCostTable) -> float:
        return sum(
            (self.energy_gain(name, configuration, costs) / t.target(configuration).energy_gain - 1.0) ** 2
            for name, t in self.targets.models.items()
        )

    def _search(self, parameter: str, configuration: str, bounds: Tuple[float, float], **fixed: float) -> float:
        result = minimize_scalar(
            lambda value: self._energy_error(configuration, self._costs(**fixed, **{parameter: value})),
            bounds=bounds,
            method="bounded",
            options={"xatol": 1e-6},
        )
        logger.info("[RECV] %s = %.6g pJ（残差平方和 %.3g）", parameter, result.x, result.fun)
        return float(result.x)

    def fit(self) -> CalibrationResult:
        """
        两步拟合并评估全部比值

        Raises:
            CalibrationInfeasible: 任一比值残差超过容差
        """
        cpu = self._search("cpu_active_cycle", "cpu-ee", self.targets.cpu_bounds)
        accel = self._search("accel_active_cycle", "offload", self.targets.accel_bounds, cpu_active_cycle=cpu)
        costs = self._costs(cpu_active_cycle=cpu, accel_active_cycle=accel, fitted=True, source="calibrate")

        rows: List[RatioRow] = []
        power_ratios: Dict[str, float] = {}
        for name, t in sorted(self.targets.models.items()):
            for configuration in CONFIGURATIONS:
                target = t.target(configuration)
                speedup = self.speedup(name, configuration)
                gain = self.energy_gain(name, configuration, costs)
                rows.append(RatioRow(name, configuration, "speedup", target.speedup, speedup))
                rows.append(RatioRow(name, configuration, "energy_gain", target.energy_gain, gain))
                # 平均功率之比 = 加速比 / 能量收益
                power_ratios[f"{name}/{configuration}"] = speedup / gain

        result = CalibrationResult(costs, rows, power_ratios, self.targets.tolerance)
        if result.worst_residual > self.targets.tolerance:
            worst = max(rows, key=lambda r: abs(r.residual))
            raise CalibrationInfeasible(
                f"{worst.model}/{worst.configuration} {worst.metric}: simulated {worst.simulated:.3f} "
                f"vs target {worst.target:.3f} ({worst.residual:+.1%}, tolerance {self.targets.tolerance:.0%})"
            )
        logger.info("[OK] 校准完成，最大残差 %.2f%%", 100 * result.worst_residual)
        return result


def calibrate(
    targets: CalibrationTargets,
    config: PlatformConfig,
    base: Optional[DynamicCostTable] = None,
) -> CalibrationResult:
    """按目标比值拟合 cpu_active_cycle 与 accel_active_cycle"""
    return Calibrator(targets, config, base).fit()

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
静态面积/漏电模型与动态能耗单价表

面积与漏电按组件份额分配（来源于后端综合结果的饼图）。
漏电份额原始值之和为1.03，计算前归一化；原始值和归一化值都会出现在报告里。
份额用 Fraction 精确计算，输出时才转成浮点数。
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping

from pydantic import BaseModel, ConfigDict, Field

from config.platform_config import Peripheral, PlatformConfig
from hw.memory import PowerState, leakage_fraction

# 组件顺序即报告顺序
COMPONENTS = ("memory", "ao", "peripheral", "cpu", "bus", "debug")

AREA_SHARES = {
    "memory": "0.44",
    "ao": "0.21",
    "peripheral": "0.11",
    "cpu": "0.18",
    "bus": "0.04",
    "debug": "0.02",
}

LEAKAGE_SHARES = {
    "memory": "0.84",
    "ao": "0.06",
    "peripheral": "0.04",
    "cpu": "0.05",
    "bus": "0.02",
    "debug": "0.02",
}

# 常开域：永远不能门控
ALWAYS_ON_COMPONENTS = ("ao", "bus", "debug")


@dataclass(frozen=True)
class ShareRow:
    component: str
    raw_share: Fraction
    normalized_share: Fraction
    scale: Fraction

    @property
    def removed(self) -> bool:
        return self.scale == 0

    @property
    def effective_share(self) -> Fraction:
        return self.normalized_share * self.scale


class ShareModel:
    """
    按份额分配总量的模型

    Args:
        total: 参考总量（mm² 或 µW）
        raw_shares: 原始份额
        bank_count: 存储体数量，存储份额在各体之间平分
        peripheral_scale: 保留外设比例（|peripherals| / 6）
        cpu_scale: 内核份额缩放
    """

    def __init__(
        self,
        total: float,
        raw_shares: Mapping[str, str],
        bank_count: int = 2,
        peripheral_scale: Fraction = Fraction(1),
        cpu_scale: Fraction = Fraction(1),
    ):
        self.total = Fraction(str(total))
        self.raw = {c: Fraction(raw_shares[c]) for c in COMPONENTS}
        self.raw_sum = sum(self.raw.values(), Fraction(0))
        self.bank_count = bank_count
        self._scale = {c: Fraction(1) for c in COMPONENTS}
        self._scale["peripheral"] = peripheral_scale
        self._scale["cpu"] = cpu_scale

    @staticmethod
    def _adjustments(config: PlatformConfig):
        peripheral_scale = Fraction(len(config.peripherals), len(Peripheral))
        cpu_scale = Fraction(str(config.energy.core_scale(config.core_type)))
        return peripheral_scale, cpu_scale

    def rows(self) -> List[ShareRow]:
        return [
            ShareRow(c, self.raw[c], self.raw[c] / self.raw_sum, self._scale[c])
            for c in COMPONENTS
        ]

    def normalized_sum(self) -> Fraction:
        return sum((r.normalized_share for r in self.rows()), Fraction(0))

    def component_value(self, component: str) -> Fraction:
        """组件的绝对量（按配置调整后）"""
        return self.total * self.raw[component] / self.raw_sum * self._scale[component]

    def component_raw_value(self, component: str) -> Fraction:
        """未归一化的绝对量"""
        return self.total * self.raw[component] * self._scale[component]

    def bank_share(self) -> Fraction:
        return self.raw["memory"] / self.raw_sum / self.bank_count

    def bank_raw_share(self) -> Fraction:
        return self.raw["memory"] / self.bank_count

    def configured_total(self) -> Fraction:
        return sum((self.component_value(c) for c in COMPONENTS), Fraction(0))

    def domain_value(self, domain: str) -> Fraction:
        """电源域的绝对量：bank{i} 平分存储份额，加速器域不计入宿主"""
        if domain.startswith("bank"):
            return self.component_value("memory") / self.bank_count
        if domain in self._scale:
            return self.component_value(domain)
        return Fraction(0)


class AreaModel(ShareModel):
    """面积模型（mm²），份额原始值之和为1.0"""

    def __init__(self, total_mm2: float = 0.15, **kwargs):
        super().__init__(total_mm2, AREA_SHARES, **kwargs)

    @classmethod
    def from_config(cls, config: PlatformConfig) -> "AreaModel":
        peripheral_scale, cpu_scale = cls._adjustments(config)
        return cls(
            config.energy.total_area_mm2,
            bank_count=config.bank_count,
            peripheral_scale=peripheral_scale,
            cpu_scale=cpu_scale,
        )


class LeakageModel(ShareModel):
    """漏电模型（µW），漏电按 份额 × 总量 × 状态比例 逐周期累积"""

    def __init__(
        self,
        total_uw: float = 29.0,
        retention_fraction: float = 0.25,
        accelerator_leakage_uw: float = 0.0,
        **kwargs,
    ):
        super().__init__(total_uw, LEAKAGE_SHARES, **kwargs)
        self.retention_fraction = retention_fraction
        self.accelerator_leakage_uw = accelerator_leakage_uw

    @classmethod
    def from_config(cls, config: PlatformConfig) -> "LeakageModel":
        peripheral_scale, cpu_scale = cls._adjustments(config)
        return cls(
            config.energy.total_leakage_uw,
            retention_fraction=config.energy.retention_fraction,
            accelerator_leakage_uw=config.energy.accelerator_leakage_uw,
            bank_count=config.bank_count,
            peripheral_scale=peripheral_scale,
            cpu_scale=cpu_scale,
        )

    def domain_power_uw(self, domain: str, state: PowerState = PowerState.ON) -> float:
        if domain.startswith("accel"):
            base = float(self.accelerator_leakage_uw)
        else:
            base = float(self.domain_value(domain))
        return base * leakage_fraction(state, self.retention_fraction)

    def power_uw(self, states: Mapping[str, PowerState]) -> float:
        """给定各域状态时的总漏电功率"""
        return sum(self.domain_power_uw(d, s) for d, s in states.items())

    def floor_uw(self, always_on_domains: Iterable[str] = ALWAYS_ON_COMPONENTS) -> float:
        return sum(self.domain_power_uw(d) for d in always_on_domains)


class DynamicCostTable(BaseModel):
    """
    各类事件的动态能耗单价（pJ）

    缺省值是用校准流程拟合出来的，不是测量值。
    cpu_active_cycle / accel_active_cycle 按开关活动度加权计数。
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    cpu_active_cycle: float = Field(22.0, ge=0)
    accel_active_cycle: float = Field(36.7, ge=0)
    bus_grant: float = Field(0.6, ge=0)
    mem_access: float = Field(1.4, ge=0)
    dma_element: float = Field(0.8, ge=0)
    peripheral_access: float = Field(2.0, ge=0)
    fitted: bool = True
    source: str = "default calibration fixture"

    @classmethod
    def event_classes(cls) -> List[str]:
        return [
            "cpu_active_cycle",
            "accel_active_cycle",
            "bus_grant",
            "mem_access",
            "dma_element",
            "peripheral_access",
        ]

    def cost_pj(self, counter: str):
        """计数器对应的单价，非计价计数器返回None"""
        if counter in self.event_classes():
            return getattr(self, counter)
        return None

    def prices(self) -> Dict[str, float]:
        return {c: getattr(self, c) for c in self.event_classes()}

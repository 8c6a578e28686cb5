#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
能量账本与静态报告

accrue() 把一次运行的活动计数器和电源域驻留周期换算成各组件的动态能量与漏电能量（焦耳）。
static_report() 复现面积/漏电分布，同时给出原始份额和归一化份额。
"""

from dataclasses import dataclass, field
from typing import Dict, List

from config.platform_config import PlatformConfig
from energy.models import COMPONENTS, AreaModel, DynamicCostTable, LeakageModel, ShareModel
from hw.memory import PowerState
from sim.engine import RunSummary

PJ = 1e-12
UW = 1e-6


@dataclass
class EnergyLedger:
    """
    各组件的漏电与动态能量累加器

    组件名与电源域一致（cpu、bank0、bus、dma、accel0 ...）。
    """

    leakage_j: Dict[str, float] = field(default_factory=dict)
    dynamic_j: Dict[str, float] = field(default_factory=dict)
    duration_s: float = 0.0
    cycles: int = 0

    def add_leakage(self, component: str, joules: float) -> None:
        self.leakage_j[component] = self.leakage_j.get(component, 0.0) + joules

    def add_dynamic(self, component: str, joules: float) -> None:
        self.dynamic_j[component] = self.dynamic_j.get(component, 0.0) + joules

    @property
    def total_leakage_j(self) -> float:
        return sum(self.leakage_j.values())

    @property
    def total_dynamic_j(self) -> float:
        return sum(self.dynamic_j.values())

    @property
    def total_j(self) -> float:
        return self.total_leakage_j + self.total_dynamic_j

    def components(self) -> List[str]:
        return sorted(set(self.leakage_j) | set(self.dynamic_j))

    def scaled(self, factor: float) -> "EnergyLedger":
        return EnergyLedger(
            {c: v * factor for c, v in self.leakage_j.items()},
            {c: v * factor for c, v in self.dynamic_j.items()},
            self.duration_s * factor,
            round(self.cycles * factor),
        )

    def merged(self, other: "EnergyLedger") -> "EnergyLedger":
        result = EnergyLedger(dict(self.leakage_j), dict(self.dynamic_j), self.duration_s, self.cycles)
        for c, v in other.leakage_j.items():
            result.add_leakage(c, v)
        for c, v in other.dynamic_j.items():
            result.add_dynamic(c, v)
        result.duration_s += other.duration_s
        result.cycles += other.cycles
        return result

    def to_dict(self) -> Dict:
        return {
            "components": {
                c: {
                    "leakage_j": self.leakage_j.get(c, 0.0),
                    "dynamic_j": self.dynamic_j.get(c, 0.0),
                    "total_j": self.leakage_j.get(c, 0.0) + self.dynamic_j.get(c, 0.0),
                }
                for c in self.components()
            },
            "total_leakage_j": self.total_leakage_j,
            "total_dynamic_j": self.total_dynamic_j,
            "total_j": self.total_j,
            "duration_s": self.duration_s,
            "cycles": self.cycles,
        }


def accrue(summary: RunSummary, costs: DynamicCostTable, leak: LeakageModel, clock_hz: int) -> EnergyLedger:
    """
    把一次运行换算成能量

    dynamic_j[c] = Σ 事件数 × 单价；leakage_j[c] = Σ 驻留周期 × 份额 × 总漏电 × 状态比例 / clock_hz。
    非计价计数器（例如原始计算周期数）被忽略。

    Args:
        summary: 运行结果（activity + residency）
        costs: 动态单价表
        leak: 漏电模型
        clock_hz: 时钟频率

    Returns:
        EnergyLedger: 结果只取决于输入
    """
    ledger = EnergyLedger(duration_s=summary.final_time / clock_hz, cycles=summary.final_time)

    for component, counters in sorted(summary.activity.items()):
        for counter, amount in sorted(counters.items()):
            price = costs.cost_pj(counter)
            if price is None:
                continue
            ledger.add_dynamic(component, amount * price * PJ)

    for domain, cycles_by_state in sorted(summary.residency.items()):
        joules = 0.0
        for state_name, cycles in cycles_by_state.items():
            if cycles:
                joules += leak.domain_power_uw(domain, PowerState(state_name)) * UW * cycles / clock_hz
        ledger.add_leakage(domain, joules)
    return ledger


def _share_rows(model: ShareModel, unit: str) -> List[Dict]:
    rows = []
    for row in model.rows():
        rows.append(
            {
                "component": row.component,
                "raw_share": float(row.raw_share),
                "normalized_share": float(row.normalized_share),
                unit: float(model.component_value(row.component)),
                f"raw_{unit}": float(model.component_raw_value(row.component)),
                "removed": row.removed,
            }
        )
    return rows


def _bank_rows(model: ShareModel, unit: str) -> List[Dict]:
    per_bank = model.component_value("memory") / model.bank_count
    return [
        {
            "bank": f"bank{i}",
            "raw_share": float(model.bank_raw_share()),
            "normalized_share": float(model.bank_share()),
            unit: float(per_bank),
            f"raw_{unit}": float(model.total * model.bank_raw_share()),
        }
        for i in range(model.bank_count)
    ]


def static_report(config: PlatformConfig) -> Dict:
    """
    面积与漏电的静态分布

    存储份额在各存储体之间平分；外设全部移除时外设行标记为 removed，总量相应减少。
    """
    area = AreaModel.from_config(config)
    leak = LeakageModel.from_config(config)
    floor_domains = ["ao", "bus", "debug"] + [
        f"bank{i}" for i in range(config.bank_count) if not config.is_bank_gateable(i)
    ]
    floor_raw = sum(float(leak.total * leak.raw[c]) for c in ("ao", "bus", "debug"))
    return {
        "area": {
            "reference_total_mm2": float(area.total),
            "total_mm2": float(area.configured_total()),
            "raw_share_sum": float(area.raw_sum),
            "normalized_share_sum": float(area.normalized_sum()),
            "components": _share_rows(area, "mm2"),
            "banks": _bank_rows(area, "mm2"),
        },
        "leakage": {
            "reference_total_uw": float(leak.total),
            "total_uw": float(leak.configured_total()),
            "raw_share_sum": float(leak.raw_sum),
            "normalized_share_sum": float(leak.normalized_sum()),
            "normalized": leak.raw_sum != 1,
            "components": _share_rows(leak, "uw"),
            "banks": _bank_rows(leak, "uw"),
            "deep_sleep_uw": leak.floor_uw(floor_domains),
            "deep_sleep_raw_uw": floor_raw,
            "retention_fraction": leak.retention_fraction,
        },
        "component_order": list(COMPONENTS),
    }

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
平台配置

PlatformConfig 描述一个平台实例的全部可调参数（存储体、总线、外设、加速器插槽）。
解析阶段只检查结构和类型；不变量由 validate() 以数据形式报告，
这样不合法的配置也能被加载并列出全部问题。
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, field_serializer


class CoreType(str, Enum):
    CV32E20 = "CV32E20"
    CV32E40X = "CV32E40X"
    CV32E40P = "CV32E40P"
    CV32E40PX = "CV32E40PX"


# 带 CORE-V-XIF 接口的内核
XIF_CORES = frozenset({CoreType.CV32E40X, CoreType.CV32E40PX})


class BusTopology(str, Enum):
    ONE_AT_A_TIME = "OneAtATime"
    FULL_CROSSBAR = "FullCrossbar"


class Peripheral(str, Enum):
    """外设，声明顺序即地址布局顺序"""

    GPIO = "GPIO"
    I2C = "I2C"
    I2S = "I2S"
    SPI = "SPI"
    TIMER = "Timer"
    PLIC = "PLIC"


class Arbitration(str, Enum):
    ROUND_ROBIN = "round-robin"
    FIXED_PRIORITY = "fixed-priority"


class XaifMasterMode(str, Enum):
    """加速器主端口是独立总线主设备，还是复用DMA通道"""

    DEDICATED = "dedicated"
    SHARED_DMA = "shared-dma"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TimingConfig(_Strict):
    """时序参数（周期）"""

    memory_latency: int = 1
    peripheral_latency: int = 2
    interrupt_latency: int = 1
    gate_latency: int = 1
    ungate_latency: int = 1
    retention_wake_latency: int = 2
    power_up_latency: int = 10


class EnergyParams(_Strict):
    """静态模型的标定参数"""

    total_area_mm2: float = 0.15
    total_leakage_uw: float = 29.0
    retention_fraction: float = 0.25
    # 各内核的份额差异未标定，缺省全部为1.0
    core_share_scale: Dict[CoreType, float] = {}
    accelerator_leakage_uw: float = 0.0

    def core_scale(self, core: CoreType) -> float:
        return self.core_share_scale.get(core, 1.0)


class AcceleratorEntry(_Strict):
    """挂到某个XAIF插槽上的加速器"""

    slot: int
    model: str = "nm-vector"
    master_ports: int = 1
    params: Dict[str, Any] = {}


class PlatformConfig(_Strict):
    """平台实例的完整描述，校验后不可变，可在并发运行之间只读共享"""

    core_type: CoreType = CoreType.CV32E40P
    bank_count: int = 2
    bank_size_bytes: int = 32 * 1024
    bus_topology: BusTopology = BusTopology.FULL_CROSSBAR
    dma_channel_count: int = 2
    peripherals: FrozenSet[Peripheral] = frozenset(Peripheral)
    accelerator_slots: int = 0
    clock_hz: int = 300_000_000
    voltage_v: float = 0.8
    arbitration: Arbitration = Arbitration.ROUND_ROBIN
    xaif_master_mode: XaifMasterMode = XaifMasterMode.DEDICATED
    bank_gateable: Optional[Tuple[bool, ...]] = None
    accelerators: Tuple[AcceleratorEntry, ...] = ()
    timing: TimingConfig = TimingConfig()
    energy: EnergyParams = EnergyParams()

    @field_serializer("peripherals")
    def _serialize_peripherals(self, value: FrozenSet[Peripheral]) -> List[str]:
        return [p.value for p in Peripheral if p in value]

    @property
    def xif_available(self) -> bool:
        return self.core_type in XIF_CORES

    def ordered_peripherals(self) -> List[Peripheral]:
        return [p for p in Peripheral if p in self.peripherals]

    def is_bank_gateable(self, index: int) -> bool:
        if self.bank_gateable is None:
            return True
        return self.bank_gateable[index]


@dataclass(frozen=True)
class FieldError:
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


@dataclass
class ValidationReport:
    """校验结果，errors 为空表示配置合法"""

    errors: List[FieldError] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def add(self, field_name: str, message: str) -> None:
        self.errors.append(FieldError(field_name, message))

    def fields(self) -> List[str]:
        return [e.field for e in self.errors]


# 地址布局常量（与 address_map 共享）
BANK_REGION_BASE = 0x0000_0000
PERIPHERAL_REGION_BASE = 0x2000_0000
AO_REGION_BASE = 0x2010_0000
ACCEL_REGION_BASE = 0x3000_0000
PERIPHERAL_WINDOW = 0x1000
AO_WINDOW = 0x1_0000
ACCEL_WINDOW = 0x1_0000
MIN_BANK_SIZE = 256


def _is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


def validate(config: PlatformConfig) -> ValidationReport:
    """
    检查 PlatformConfig 的全部不变量

    违规项作为数据返回，每条都指明出错字段；本函数从不抛异常。

    Args:
        config: 待校验配置

    Returns:
        ValidationReport: 违规列表为空当且仅当配置合法
    """
    report = ValidationReport()

    if config.bank_count < 1:
        report.add("bank_count", "bank_count must be >= 1")
    if not _is_power_of_two(config.bank_size_bytes):
        report.add("bank_size_bytes", "bank_size_bytes not a power of two")
    elif config.bank_size_bytes < MIN_BANK_SIZE:
        report.add("bank_size_bytes", f"bank_size_bytes must be >= {MIN_BANK_SIZE}")
    if config.dma_channel_count < 1:
        report.add("dma_channel_count", "dma_channel_count must be >= 1")
    if config.accelerator_slots < 0:
        report.add("accelerator_slots", "accelerator_slots must be >= 0")
    if config.clock_hz <= 0:
        report.add("clock_hz", "clock_hz must be positive")
    if config.voltage_v <= 0:
        report.add("voltage_v", "voltage_v must be positive")

    if config.bank_count >= 1 and config.bank_size_bytes > 0:
        if config.bank_count * config.bank_size_bytes > PERIPHERAL_REGION_BASE - BANK_REGION_BASE:
            report.add("bank_count", "memory banks overlap the peripheral region")
    if config.accelerator_slots * ACCEL_WINDOW > (1 << 32) - ACCEL_REGION_BASE:
        report.add("accelerator_slots", "accelerator windows exceed the 32-bit address space")

    if config.bank_gateable is not None and len(config.bank_gateable) != config.bank_count:
        report.add("bank_gateable", "bank_gateable must list one flag per bank")

    for name, value in config.timing.model_dump().items():
        if value < 1:
            report.add(f"timing.{name}", f"timing.{name} must be >= 1")

    energy = config.energy
    if not 0.0 < energy.retention_fraction < 1.0:
        report.add("energy.retention_fraction", "retention_fraction must lie in (0, 1)")
    if energy.total_area_mm2 <= 0:
        report.add("energy.total_area_mm2", "total_area_mm2 must be positive")
    if energy.total_leakage_uw <= 0:
        report.add("energy.total_leakage_uw", "total_leakage_uw must be positive")
    if energy.accelerator_leakage_uw < 0:
        report.add("energy.accelerator_leakage_uw", "accelerator_leakage_uw must be >= 0")
    for core, scale in energy.core_share_scale.items():
        if scale <= 0:
            report.add(f"energy.core_share_scale.{core.value}", "core share scale must be positive")

    _validate_accelerators(config, report)
    return report


def _validate_accelerators(config: PlatformConfig, report: ValidationReport) -> None:
    # 延迟导入：加速器注册表位于 hw.xaif，而 hw 依赖本模块
    from hw.xaif import known_accelerator_models

    known = known_accelerator_models()
    seen = set()
    for i, entry in enumerate(config.accelerators):
        prefix = f"accelerators.{i}"
        if not 0 <= entry.slot < config.accelerator_slots:
            report.add(f"{prefix}.slot", f"slot {entry.slot} does not exist")
        elif entry.slot in seen:
            report.add(f"{prefix}.slot", f"slot {entry.slot} assigned twice")
        seen.add(entry.slot)
        if entry.model not in known:
            report.add(f"{prefix}.model", f"unknown accelerator model {entry.model!r}")
        if entry.master_ports < 0:
            report.add(f"{prefix}.master_ports", "master_ports must be >= 0")
        bank = entry.params.get("bank_index")
        if bank is not None and not (isinstance(bank, int) and 0 <= bank < config.bank_count):
            report.add(f"{prefix}.params.bank_index", f"bank_index {bank!r} does not exist")

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
仿真异常定义

所有模块抛出的异常都继承自 SimError，CLI 根据异常类型决定退出码。
"""

from typing import Optional


class SimError(Exception):
    """仿真器异常基类"""


class ContractViolation(SimError):
    """调用方违反了前置条件（例如在过去的时间调度事件），仿真必须中止"""


class DecodeError(SimError):
    """地址不属于任何区域"""

    def __init__(self, address: int):
        super().__init__(f"address 0x{address:08X} does not decode to any region")
        self.address = address


class SlaveError(SimError):
    """目标从设备不可用（掉电、门控或处于计算模式）"""


class ConfigError(SimError):
    """描述符或配置在运行期被发现不合法"""


class ChannelBusy(SimError):
    """DMA通道已经在工作"""


class IllegalTransition(SimError):
    """非法的电源状态转换"""


class SlotOccupied(SimError):
    """加速器插槽已被占用"""


class NoSuchSlot(SimError):
    """加速器插槽不存在"""


class AcceleratorBusy(SimError):
    """加速器忙，不能接受新的卸载命令"""


class PoweredDown(SimError):
    """加速器所在电源域没有上电"""


class CalibrationInfeasible(SimError):
    """校准残差超过容差"""


class DomainError(SimError):
    """数学输入不在定义域内（例如概率向量不归一）"""


class FileFormatError(SimError):
    """
    输入文件格式错误

    Args:
        message: 错误描述
        source: 文件路径
        line: 出错行号（JSON语法错误时可用）
        field: 出错字段路径（结构校验错误时可用）
    """

    def __init__(
        self,
        message: str,
        source: str = "<string>",
        line: Optional[int] = None,
        field: Optional[str] = None,
    ):
        location = source
        if line is not None:
            location += f":{line}"
        if field:
            location += f" [{field}]"
        super().__init__(f"{location}: {message}")
        self.message = message
        self.source = source
        self.line = line
        self.field = field


class ValidationFailed(SimError):
    """配置或场景没有通过结构校验，report 为 ValidationReport"""

    def __init__(self, report, source: str = "<string>"):
        details = "; ".join(str(e) for e in report.errors)
        super().__init__(f"{source}: {details}")
        self.report = report
        self.source = source

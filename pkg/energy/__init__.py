"""面积/漏电模型、动态单价表与能量账本（校准流程见 energy.calibration）"""

from .models import AreaModel, DynamicCostTable, LeakageModel
from .ledger import EnergyLedger, accrue, static_report

__all__ = [
    "AreaModel",
    "DynamicCostTable",
    "EnergyLedger",
    "LeakageModel",
    "accrue",
    "static_report",
]

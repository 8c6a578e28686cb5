"""硬件模型：存储体、总线、DMA、电源、加速器插槽、CPU 与平台组装"""

from .memory import AccessKind, BankMode, MemoryBank, PowerState
from .interconnect import Bus, BusResponse, BusTransaction, ResponseStatus, decode
from .power import InterruptController, InterruptLine, PowerManager, deep_sleep_leakage
from .dma import DmaDescriptor, DmaEngine, address_sequence
from .xaif import AcceleratorModel, NearMemVector, OffloadCommand, XaifSocket, register_accelerator
from .cpu import Cpu, Directive
from .soc import Soc

__all__ = [
    "AccessKind",
    "AcceleratorModel",
    "BankMode",
    "Bus",
    "BusResponse",
    "BusTransaction",
    "Cpu",
    "Directive",
    "DmaDescriptor",
    "DmaEngine",
    "InterruptController",
    "InterruptLine",
    "MemoryBank",
    "NearMemVector",
    "OffloadCommand",
    "PowerManager",
    "PowerState",
    "ResponseStatus",
    "Soc",
    "XaifSocket",
    "address_sequence",
    "decode",
    "deep_sleep_leakage",
    "register_accelerator",
]

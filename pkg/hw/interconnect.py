#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
OBI风格总线

支持两种拓扑：
- OneAtATime: 全系统每周期最多授权一个事务
- FullCrossbar: 每个从设备每周期最多授权一个事务，不同从设备可并行
同一授权的竞争者之间按 master 注册顺序轮询（或固定优先级）。
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional, Protocol

from config.address_map import AddressMap, Region, RegionKind
from config.platform_config import Arbitration, BusTopology, TimingConfig
from hw.memory import AccessKind
from sim.engine import Component, Engine, Event, EventKind
from sim.errors import ContractViolation, DecodeError, SlaveError

logger = logging.getLogger(__name__)

# OneAtATime 拓扑下所有事务竞争同一个授权
_SYSTEM_GRANT = "*"


class ResponseStatus(str, Enum):
    OK = "ok"
    SLAVE_ERROR = "slave-error"
    DECODE_ERROR = "decode-error"


@dataclass(frozen=True)
class RegionRef:
    region: Region
    offset: int


@dataclass
class BusTransaction:
    """一次 master -> slave 访问尝试"""

    master_id: str
    address: int
    kind: AccessKind = AccessKind.READ
    width_bytes: int = 4
    data: Optional[int] = None
    issue_cycle: int = 0
    grant_cycle: Optional[int] = None
    target: Optional[RegionRef] = None
    txn_id: int = -1
    on_response: Optional[Callable[["BusResponse"], None]] = field(default=None, repr=False, compare=False)

    @property
    def slave(self) -> str:
        return self.target.region.name if self.target else "-"


@dataclass(frozen=True)
class BusResponse:
    txn: BusTransaction
    status: ResponseStatus
    complete_cycle: int
    data: Optional[int] = None
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status is ResponseStatus.OK

    def describe(self) -> str:
        t = self.txn
        grant = "-" if t.grant_cycle is None else str(t.grant_cycle)
        return (
            f"master={t.master_id} slave={t.slave} addr=0x{t.address:08X} kind={t.kind.value} "
            f"issue={t.issue_cycle} grant={grant} complete={self.complete_cycle} status={self.status.value}"
        )


class BusSlave(Protocol):
    """总线从设备约定：不可用时抛 SlaveError"""

    def access(self, offset: int, kind: AccessKind, width: int, data: Optional[int] = None) -> Optional[int]:
        ...


def decode(address: int, address_map: AddressMap) -> RegionRef:
    """
    地址译码

    Raises:
        DecodeError: 没有区域包含该地址
    """
    region = address_map.find(address)
    if region is None:
        raise DecodeError(address)
    return RegionRef(region, address - region.base)


class Arbiter:
    """按拓扑对待决事务做每周期仲裁"""

    def __init__(self, topology: BusTopology, policy: Arbitration = Arbitration.ROUND_ROBIN):
        self.topology = topology
        self.policy = policy
        self._masters: Dict[str, int] = {}
        self._last: Dict[str, int] = {}

    def register_master(self, master_id: str) -> int:
        if master_id not in self._masters:
            self._masters[master_id] = len(self._masters)
        return self._masters[master_id]

    @property
    def masters(self) -> List[str]:
        return list(self._masters)

    def knows(self, master_id: str) -> bool:
        return master_id in self._masters

    def _grant_key(self, txn: BusTransaction) -> str:
        if self.topology is BusTopology.ONE_AT_A_TIME:
            return _SYSTEM_GRANT
        return txn.target.region.name

    def _rank(self, key: str, txn: BusTransaction):
        index = self._masters[txn.master_id]
        if self.policy is Arbitration.FIXED_PRIORITY:
            rotated = index
        else:
            # 从上次获胜者的下一个开始轮询
            rotated = (index - self._last.get(key, -1) - 1) % len(self._masters)
        return rotated, txn.issue_cycle, txn.txn_id

    def arbitrate(self, pending: Iterable[BusTransaction], cycle: int) -> List[BusTransaction]:
        """
        选出本周期获得授权的事务

        Args:
            pending: 已译码的待决事务
            cycle: 当前周期

        Returns:
            List[BusTransaction]: 获得授权的事务（按 master 顺序），其余保持待决
        """
        contenders: Dict[str, List[BusTransaction]] = {}
        for txn in pending:
            if txn.master_id not in self._masters:
                raise ContractViolation(f"unregistered bus master {txn.master_id!r}")
            contenders.setdefault(self._grant_key(txn), []).append(txn)

        grants = []
        for key in sorted(contenders):
            winner = min(contenders[key], key=lambda t: self._rank(key, t))
            self._last[key] = self._masters[winner.master_id]
            winner.grant_cycle = cycle
            grants.append(winner)
        grants.sort(key=lambda t: self._masters[t.master_id])
        return grants


class Bus(Component):
    """总线组件，负责译码、仲裁和按固定延迟完成事务"""

    name = "bus"

    def __init__(
        self,
        engine: Engine,
        address_map: AddressMap,
        topology: BusTopology,
        timing: TimingConfig = TimingConfig(),
        policy: Arbitration = Arbitration.ROUND_ROBIN,
    ):
        self.engine = engine
        self.address_map = address_map
        self.timing = timing
        self.arbiter = Arbiter(topology, policy)
        self._slaves: Dict[str, BusSlave] = {}
        self._pending: List[BusTransaction] = []
        self._arb_scheduled: Optional[int] = None
        self._last_arb_cycle = -1
        self._next_id = 0
        self.issued = 0
        self.granted = 0
        self.errored = 0
        self.completed = 0

    @property
    def topology(self) -> BusTopology:
        return self.arbiter.topology

    def register_master(self, master_id: str) -> int:
        return self.arbiter.register_master(master_id)

    def attach_slave(self, region_name: str, slave: BusSlave) -> None:
        self._slaves[region_name] = slave

    @property
    def pending(self) -> List[BusTransaction]:
        return list(self._pending)

    def issue(self, txn: BusTransaction) -> BusTransaction:
        """
        主设备发出事务

        译码失败时不进入仲裁，下一周期返回 DecodeError 响应。
        """
        if not self.arbiter.knows(txn.master_id):
            raise ContractViolation(f"unregistered bus master {txn.master_id!r}")
        now = self.engine.now
        txn.issue_cycle = now
        txn.txn_id = self._next_id
        self._next_id += 1
        self.issued += 1

        try:
            txn.target = decode(txn.address, self.address_map)
        except DecodeError as e:
            self.errored += 1
            logger.debug("[ERROR] %s 译码失败: %s", txn.master_id, e)
            self._respond(BusResponse(txn, ResponseStatus.DECODE_ERROR, now + 1, message=str(e)))
            return txn

        self._pending.append(txn)
        self._ensure_arbitration(now)
        return txn

    def _ensure_arbitration(self, now: int) -> None:
        if self._arb_scheduled is not None:
            return
        cycle = now if now > self._last_arb_cycle else now + 1
        self._arb_scheduled = cycle
        self.engine.schedule(Event(cycle, self.name, EventKind.CUSTOM, tag="arbitrate"))

    def _latency(self, region: Region) -> int:
        if region.kind is RegionKind.MEMORY_BANK:
            return self.timing.memory_latency
        return self.timing.peripheral_latency

    def _energy_component(self, region: Region) -> str:
        if region.kind is RegionKind.PERIPHERAL:
            return "peripheral"
        return region.name

    def complete(self, txn: BusTransaction) -> BusResponse:
        """
        在授权周期执行已授权事务并生成响应

        从设备状态以授权周期为准；存储体1周期完成，外设/加速器窗口2周期完成。
        """
        if txn.grant_cycle is None:
            raise ContractViolation(f"transaction {txn.txn_id} completed before grant")
        region = txn.target.region
        done = txn.grant_cycle + self._latency(region)
        slave = self._slaves.get(region.name)
        if slave is None:
            return BusResponse(txn, ResponseStatus.SLAVE_ERROR, done, message=f"no slave at {region.name}")
        try:
            data = slave.access(txn.target.offset, txn.kind, txn.width_bytes, txn.data)
        except SlaveError as e:
            return BusResponse(txn, ResponseStatus.SLAVE_ERROR, done, message=str(e))
        if region.kind is RegionKind.MEMORY_BANK:
            self.engine.count(region.name, "mem_access")
        else:
            self.engine.count(self._energy_component(region), "peripheral_access")
        return BusResponse(txn, ResponseStatus.OK, done, data=data)

    def _respond(self, response: BusResponse) -> None:
        self.engine.schedule(
            Event(response.complete_cycle, self.name, EventKind.BUS_GRANT, data=response)
        )

    def handle(self, event: Event) -> None:
        if event.kind is EventKind.BUS_GRANT:
            response: BusResponse = event.data
            self.completed += 1
            if response.txn.on_response is not None:
                response.txn.on_response(response)
            return

        # 仲裁
        now = self.engine.now
        self._arb_scheduled = None
        self._last_arb_cycle = now
        grants = self.arbiter.arbitrate(self._pending, now)
        for txn in grants:
            self._pending.remove(txn)
            self.granted += 1
            self.engine.count(self.name, "bus_grant")
            response = self.complete(txn)
            if not response.ok:
                self.errored += 1
            self._respond(response)
        if self._pending:
            self._ensure_arbitration(now)

    def conservation(self) -> Dict[str, int]:
        """已发出 = 已授权 + 译码失败 + 待决"""
        decode_errors = self.issued - self.granted - len(self._pending)
        return {
            "issued": self.issued,
            "granted": self.granted,
            "decode_errors": decode_errors,
            "pending": len(self._pending),
        }

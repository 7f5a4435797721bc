"""
网格组织管理器 (GOM)
节点注册、SPC周期上报、反馈收集、RF刷新、作业调度
所有修改操作串行执行；每个被接受的事件都记入事件日志，可重放
"""
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import config
from models import (
    FeedbackVector,
    JobOutcome,
    JobSpec,
    NodeRecord,
    SecurityProfile,
    SnapshotRow,
    WeightTable,
)
from services.scoring import (
    RankEntry,
    aggregate_feedback,
    compute_node_reliability,
    compute_node_utilization,
    compute_rf,
    compute_rw,
    compute_spc,
    compute_weighted_spc,
    rank_nodes,
    select_node,
)
from utils.exceptions import (
    ConsistencyException,
    InvalidParameterException,
    NoResourceException,
    NodeNotFoundException,
    RegistrationException,
)
from utils.logger import get_logger

logger = get_logger('gom')


# ============ 事件定义 ============

@dataclass(frozen=True)
class NodeRegistered:
    node_id: str
    profile: SecurityProfile
    tpc: float
    feedback: Optional[FeedbackVector] = None


@dataclass(frozen=True)
class SpcReported:
    node_id: str
    profile: SecurityProfile


@dataclass(frozen=True)
class JobSubmitted:
    job: JobSpec


@dataclass(frozen=True)
class JobAssigned:
    job: JobSpec
    node_id: str


@dataclass(frozen=True)
class OutcomeRecorded:
    outcome: JobOutcome


@dataclass(frozen=True)
class FeedbackRecorded:
    node_id: str
    feedback: FeedbackVector


GomEvent = Union[NodeRegistered, SpcReported, JobSubmitted, JobAssigned, OutcomeRecorded, FeedbackRecorded]


class GridOrganizationManager:
    """网格组织管理器"""

    def __init__(self, refresh_every: int = config.GOM_REFRESH_EVERY,
                 admit_provisional: bool = config.ADMIT_PROVISIONAL,
                 weights: Optional[WeightTable] = None,
                 utilization_window: int = config.UTILIZATION_WINDOW):
        if refresh_every < 1:
            raise InvalidParameterException(f"refresh_every must be >= 1, got {refresh_every}")
        if utilization_window < 1:
            raise InvalidParameterException(f"utilization_window must be >= 1, got {utilization_window}")
        self.refresh_every = refresh_every
        self.admit_provisional = admit_provisional
        self.weights = weights
        self.utilization_window = utilization_window

        self.registry: Dict[str, NodeRecord] = {}
        self.feedback_store: Dict[str, List[FeedbackVector]] = {}
        self.dispatch_log: List[Tuple[str, str]] = []
        self.events: List[GomEvent] = []

        self._assignments: Dict[str, str] = {}
        self._completed: set = set()
        self._pending_events = 0

    # ============ 构造 ============

    @classmethod
    def from_fixture(cls, nodes: Iterable[Tuple[str, SecurityProfile, Optional[FeedbackVector], float]],
                     **settings) -> 'GridOrganizationManager':
        """
        用节点数据文件的记录构造GOM，文件中的反馈作为历史反馈载入

        Args:
            nodes: load_node_fixture 返回的 [(node_id, profile, feedback, tpc)]
            **settings: 传给构造函数的参数
        """
        gom = cls(**settings)
        for node_id, profile, feedback, tpc in nodes:
            gom.register_node(node_id, profile, tpc, feedback=feedback)
        return gom

    @classmethod
    def replay(cls, events: Sequence[GomEvent], **settings) -> 'GridOrganizationManager':
        """按顺序重放事件日志，得到新的GOM"""
        gom = cls(**settings)
        for event in events:
            gom.apply(event)
        return gom

    def apply(self, event: GomEvent):
        """执行单个事件"""
        if isinstance(event, NodeRegistered):
            self.register_node(event.node_id, event.profile, event.tpc, feedback=event.feedback)
        elif isinstance(event, SpcReported):
            self.report_spc(event.node_id, event.profile)
        elif isinstance(event, JobSubmitted):
            self.submit_job(event.job)
        elif isinstance(event, JobAssigned):
            self.assign_job(event.job, event.node_id)
        elif isinstance(event, OutcomeRecorded):
            self.record_outcome(event.outcome)
        elif isinstance(event, FeedbackRecorded):
            self.record_feedback(event.node_id, event.feedback)
        else:
            raise InvalidParameterException(f"Unknown event type: {type(event).__name__}")

    # ============ 节点管理 ============

    def register_node(self, node_id: str, profile: SecurityProfile, tpc: float,
                      feedback: Optional[FeedbackVector] = None) -> str:
        """
        注册节点，立即计算SPC

        Args:
            node_id: 节点ID（调用方提供，唯一）
            profile: 安全画像
            tpc: 节点总算力
            feedback: 历史反馈（可选，来自节点数据文件）

        Returns:
            node_id
        """
        if node_id in self.registry:
            raise RegistrationException(f"Node {node_id} is already registered")
        if not tpc > 0:
            raise RegistrationException(f"Node {node_id}: TPC must be positive, got {tpc}")

        record = NodeRecord(node_id=node_id, profile=profile, total_power_compute=float(tpc))
        record.spc = self._score_spc(profile)
        self.registry[node_id] = record
        self.feedback_store[node_id] = [feedback] if feedback is not None else []
        self._refresh_node(record)

        self.events.append(NodeRegistered(node_id, profile, float(tpc), feedback))
        logger.debug(f"Registered node {node_id}: spc={record.spc:.4f}, provisional={record.provisional}")
        return node_id

    def report_spc(self, node_id: str, profile: SecurityProfile) -> float:
        """节点上报新的安全画像，重新计算SPC并刷新RF"""
        record = self._get_node(node_id)
        record.profile = profile
        record.spc = self._score_spc(profile)
        self._refresh_node(record)

        self.events.append(SpcReported(node_id, profile))
        logger.debug(f"Node {node_id} reported SPC {record.spc:.4f}")
        return record.spc

    # ============ 作业调度 ============

    def submit_job(self, job: JobSpec) -> Tuple[str, str]:
        """
        把作业分配给当前RF最高的节点

        Returns:
            (job_id, node_id)
        """
        if not self.registry:
            raise NoResourceException("No registered node to submit the job to")
        if job.job_id in self._assignments:
            raise ConsistencyException(f"Job {job.job_id} was already submitted")

        node_id = select_node(self.ranking(dispatch=True))
        self._dispatch(job, node_id)
        self.events.append(JobSubmitted(job))
        return job.job_id, node_id

    def assign_job(self, job: JobSpec, node_id: str) -> Tuple[str, str]:
        """
        把作业固定分配给指定节点（轮询压测用，不经过排名）

        Returns:
            (job_id, node_id)
        """
        self._get_node(node_id)
        if job.job_id in self._assignments:
            raise ConsistencyException(f"Job {job.job_id} was already submitted")
        self._dispatch(job, node_id)
        self.events.append(JobAssigned(job, node_id))
        return job.job_id, node_id

    def record_outcome(self, outcome: JobOutcome):
        """
        记录作业结果，更新NR和NU（由GOM测量，覆盖用户上报值）
        同一结果只能记录一次
        """
        assigned = self._assignments.get(outcome.job_id)
        if assigned is None:
            logger.warning(f"Rejected outcome for unknown job {outcome.job_id}")
            raise ConsistencyException(f"Job {outcome.job_id} was never dispatched")
        if assigned != outcome.node_id:
            logger.warning(f"Rejected outcome for job {outcome.job_id}: node mismatch")
            raise ConsistencyException(
                f"Job {outcome.job_id} was dispatched to {assigned}, not {outcome.node_id}"
            )
        if outcome.job_id in self._completed:
            logger.warning(f"Rejected replayed outcome for job {outcome.job_id}")
            raise ConsistencyException(f"Outcome for job {outcome.job_id} was already recorded")

        record = self.registry[outcome.node_id]
        if outcome.utilized_power > record.total_power_compute:
            raise InvalidParameterException(
                f"Job {outcome.job_id}: utilized power {outcome.utilized_power} exceeds TPC of {record.node_id}"
            )

        self._completed.add(outcome.job_id)
        record.jobs_completed += 1
        if outcome.success:
            record.jobs_succeeded += 1
        self._log_utilization(record, outcome.utilized_power)

        self.events.append(OutcomeRecorded(outcome))
        logger.debug(f"Outcome {outcome.job_id} on {outcome.node_id}: success={outcome.success}")
        self._count_event()

    def record_feedback(self, node_id: str, feedback: FeedbackVector):
        """记录用户反馈；只接受已被调度过作业的节点的反馈"""
        record = self._get_node(node_id)
        if record.jobs_submitted == 0:
            logger.warning(f"Rejected feedback for {node_id}: no job was ever dispatched there")
            raise ConsistencyException(f"Feedback for {node_id} before any dispatch")
        stored = self.feedback_store[node_id]
        if stored and set(stored[0].names) != set(feedback.names):
            raise InvalidParameterException(
                f"Feedback attributes {sorted(feedback.names)} differ from stored {sorted(stored[0].names)}"
            )
        stored.append(feedback)

        self.events.append(FeedbackRecorded(node_id, feedback))
        logger.debug(f"Feedback #{len(stored)} recorded for {node_id}")
        self._count_event()

    # ============ 刷新与查询 ============

    def refresh(self):
        """刷新所有节点的RW/RF"""
        for record in self.registry.values():
            self._refresh_node(record)
        self._pending_events = 0
        logger.debug(f"Refreshed {len(self.registry)} node(s)")

    def ranking(self, dispatch: bool = False) -> List[RankEntry]:
        """
        当前排名；冷启动节点默认不参与

        Args:
            dispatch: 调度时如果没有非冷启动节点，则按SPC纳入冷启动节点
        """
        records = list(self.registry.values())
        eligible = [r for r in records if not r.provisional]
        if self.admit_provisional or (dispatch and not eligible):
            if dispatch and not eligible and records and not self.admit_provisional:
                logger.warning("No node has reputation yet, dispatching on SPC alone")
            eligible = records
        return rank_nodes((r.node_id, r.rf) for r in eligible)

    def snapshot(self) -> List[SnapshotRow]:
        """时间点视图：已排名节点在前，未排名的冷启动节点按ID在后"""
        ranked = self.ranking()
        ranks = {entry.node_id: entry.rank for entry in ranked}
        rows = [self._row(self.registry[entry.node_id], entry.rank) for entry in ranked]
        rows.extend(
            self._row(self.registry[node_id], None)
            for node_id in sorted(self.registry) if node_id not in ranks
        )
        return rows

    def get_node(self, node_id: str) -> NodeRecord:
        """返回节点记录的副本"""
        record = self._get_node(node_id)
        return replace(record, utilized_power_log=list(record.utilized_power_log))

    # ============ 内部方法 ============

    def _get_node(self, node_id: str) -> NodeRecord:
        record = self.registry.get(node_id)
        if record is None:
            raise NodeNotFoundException(f"Node {node_id} is not registered")
        return record

    def _dispatch(self, job: JobSpec, node_id: str):
        record = self.registry[node_id]
        record.jobs_submitted += 1
        self._assignments[job.job_id] = node_id
        self.dispatch_log.append((job.job_id, node_id))
        logger.debug(f"Job {job.job_id} -> {node_id} (rf={record.rf:.4f})")

    def _score_spc(self, profile: SecurityProfile) -> float:
        if self.weights is not None:
            return compute_weighted_spc(profile, self.weights)
        return compute_spc(profile)

    def _count_event(self):
        self._pending_events += 1
        if self._pending_events >= self.refresh_every:
            self.refresh()

    def _log_utilization(self, record: NodeRecord, utilized_power: float):
        # 只保留当前窗口内的任务，且窗口内总和不超过TPC
        window = record.utilized_power_log
        window.append(float(utilized_power))
        del window[:-self.utilization_window]
        while sum(window) > record.total_power_compute:
            window.pop(0)

    def _measured_attributes(self, record: NodeRecord) -> Dict[str, float]:
        if record.jobs_completed == 0:
            return {}
        return {
            'nu': compute_node_utilization(record.utilized_power_log, record.total_power_compute),
            'nr': compute_node_reliability(record.jobs_succeeded, record.jobs_submitted),
        }

    def _refresh_node(self, record: NodeRecord):
        stored = self.feedback_store.get(record.node_id) or []
        aggregated = aggregate_feedback(stored) if stored else None
        measured = self._measured_attributes(record)
        if measured:
            aggregated = aggregated.with_overrides(measured) if aggregated else FeedbackVector.from_mapping(measured)

        record.aggregated_feedback = aggregated
        if aggregated is None:
            # 冷启动：RW无定义，RF暂以SPC代替
            record.rw = None
            record.rf = record.spc
        else:
            record.rw = compute_rw(aggregated)
            record.rf = compute_rf(record.spc, record.rw)

    @staticmethod
    def _row(record: NodeRecord, rank: Optional[int]) -> SnapshotRow:
        return SnapshotRow(
            node_id=record.node_id,
            spc=record.spc,
            rw=record.rw,
            rf=record.rf,
            rank=rank,
            provisional=record.provisional,
        )

"""
失败率仿真
向节点提交N个作业，按失败模型抽样每个作业的成败，记录各检查点上的累计失败数
同一种子、同一配置的两次运行结果完全相同
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

import config
from grid_manager import GridOrganizationManager
from models import ExperimentResult, FeedbackVector, JobOutcome, JobSpec, SecurityProfile, check_score
from utils.exceptions import ConfigurationException, NoResourceException
from utils.logger import get_logger

NodeFixture = Tuple[str, SecurityProfile, Optional[FeedbackVector], float]

logger = get_logger('simulator')


@dataclass(frozen=True)
class FailureModel:
    """失败模型：p_fail = clamp(alpha · (1 − rf), 0, 1)"""
    alpha: float = config.SIM_ALPHA

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigurationException(f"alpha must be positive, got {self.alpha}")


def default_checkpoints(total_jobs: int, count: int = config.SIM_CHECKPOINT_COUNT) -> Tuple[int, ...]:
    """在 (0, total_jobs] 内均匀取count个检查点"""
    if total_jobs <= 0:
        return ()
    marks = {math.ceil(total_jobs * i / count) for i in range(1, count + 1)}
    return tuple(sorted(mark for mark in marks if mark > 0))


@dataclass(frozen=True)
class SimConfig:
    total_jobs: int = config.SIM_TOTAL_JOBS
    checkpoints: Optional[Tuple[int, ...]] = None
    seed: int = config.SIM_SEED
    assignment_mode: str = config.SIM_MODE
    failure_model: FailureModel = field(default_factory=FailureModel)
    feedback_loop: bool = False

    def __post_init__(self):
        if self.total_jobs < 0:
            raise ConfigurationException(f"total_jobs must be non-negative, got {self.total_jobs}")
        if self.assignment_mode not in config.SIM_MODES:
            raise ConfigurationException(
                f"assignment_mode must be one of {config.SIM_MODES}, got {self.assignment_mode!r}"
            )
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigurationException(f"seed must fit in 64 bits, got {self.seed}")
        if self.checkpoints is None:
            object.__setattr__(self, 'checkpoints', default_checkpoints(self.total_jobs))
        checkpoints = tuple(int(mark) for mark in self.checkpoints)
        if any(later <= earlier for earlier, later in zip(checkpoints, checkpoints[1:])):
            raise ConfigurationException(f"checkpoints must be strictly increasing: {checkpoints}")
        if checkpoints and (checkpoints[0] < 0 or checkpoints[-1] > self.total_jobs):
            raise ConfigurationException(f"checkpoints must lie in [0, {self.total_jobs}]: {checkpoints}")
        object.__setattr__(self, 'checkpoints', checkpoints)


def failure_probability(rf: float, model: FailureModel) -> float:
    """
    作业在RF为rf的节点上失败的概率

    Args:
        rf: 节点可靠性因子
        model: 失败模型

    Returns:
        [0,1]区间的失败概率
    """
    rf = check_score(rf, 'rf')
    if not model.alpha > 0:
        raise ConfigurationException(f"alpha must be positive, got {model.alpha}")
    return min(1.0, max(0.0, model.alpha * (1.0 - rf)))


def _streams(seed: int) -> Tuple[np.random.Generator, np.random.Generator]:
    # 工作负载和失败抽样使用相互独立的子流
    workload_seq, failure_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.Generator(np.random.PCG64(workload_seq)), np.random.Generator(np.random.PCG64(failure_seq))


def generate_workload(n: int, seed: int) -> List[JobSpec]:
    """
    生成n个作业，所需算力在WORKLOAD_POWER_RANGE内均匀分布

    Args:
        n: 作业数
        seed: 随机种子

    Returns:
        作业列表，ID确定且唯一
    """
    if n < 0:
        raise ConfigurationException(f"Workload size must be non-negative, got {n}")
    rng, _ = _streams(seed)
    low, high = config.WORKLOAD_POWER_RANGE
    powers = rng.uniform(low, high, size=n)
    return [JobSpec(job_id=f"job-{index:06d}", required_power=float(power))
            for index, power in enumerate(powers, start=1)]


def run_experiment(sim_config: SimConfig, nodes: Sequence[NodeFixture], **gom_settings) -> ExperimentResult:
    """
    运行一次失败率实验

    Args:
        sim_config: 仿真配置
        nodes: 节点数据 [(node_id, profile, feedback, tpc)]
        **gom_settings: 传给GridOrganizationManager的参数

    Returns:
        ExperimentResult
    """
    gom = GridOrganizationManager.from_fixture(nodes, **gom_settings)
    node_ids = sorted(gom.registry)
    result = ExperimentResult(
        checkpoints=list(sim_config.checkpoints),
        failures={node_id: [] for node_id in node_ids},
        assigned={node_id: [] for node_id in node_ids},
        seed=sim_config.seed,
        alpha=sim_config.failure_model.alpha,
        generator=config.RNG_ALGORITHM,
        mode=sim_config.assignment_mode,
        feedback_loop=sim_config.feedback_loop,
    )
    failures = dict.fromkeys(node_ids, 0)
    assigned = dict.fromkeys(node_ids, 0)
    pending_checkpoints = list(sim_config.checkpoints)

    def record_checkpoints(done: int):
        while pending_checkpoints and pending_checkpoints[0] <= done:
            pending_checkpoints.pop(0)
            for nid in node_ids:
                result.failures[nid].append(failures[nid])
                result.assigned[nid].append(assigned[nid])

    record_checkpoints(0)
    if sim_config.total_jobs == 0:
        return result
    if not node_ids:
        raise NoResourceException("Simulation needs at least one node")

    jobs = generate_workload(sim_config.total_jobs, sim_config.seed)
    _, failure_rng = _streams(sim_config.seed)
    draws = failure_rng.random(sim_config.total_jobs)

    for index, job in enumerate(jobs):
        if sim_config.assignment_mode == 'broker':
            _, node_id = gom.submit_job(job)
        else:
            node_id = node_ids[index % len(node_ids)]
            gom.assign_job(job, node_id)

        record = gom.registry[node_id]
        failed = bool(draws[index] < failure_probability(record.rf, sim_config.failure_model))
        failures[node_id] += failed
        assigned[node_id] += 1

        if sim_config.feedback_loop:
            utilized = min(job.required_power, record.total_power_compute)
            gom.record_outcome(JobOutcome(job.job_id, node_id, not failed, utilized))

        record_checkpoints(index + 1)

    logger.info(
        f"Simulated {sim_config.total_jobs} job(s) on {len(node_ids)} node(s) "
        f"(mode={sim_config.assignment_mode}, seed={sim_config.seed}, alpha={sim_config.failure_model.alpha})"
    )
    return result


def failure_summary(result: ExperimentResult) -> List[Dict]:
    """
    各节点在最后一个检查点上的失败率

    Returns:
        [{'node_id', 'failures', 'assigned', 'failure_rate'}]
    """
    summary = []
    for node_id, (failed, assigned) in result.final_counts().items():
        summary.append({
            'node_id': node_id,
            'failures': failed,
            'assigned': assigned,
            'failure_rate': failed / assigned if assigned > 0 else 0.0
        })
    return summary


def rank_correlation(result: ExperimentResult, rfs: Dict[str, float]) -> Optional[float]:
    """RF与最终失败数之间的Kendall tau；任一侧全部相同时无定义，返回None"""
    node_ids = [node_id for node_id in result.node_ids if node_id in rfs]
    counts = result.final_counts()
    tau, _ = stats.kendalltau([rfs[node_id] for node_id in node_ids],
                              [counts[node_id][0] for node_id in node_ids])
    if math.isnan(tau):
        return None
    return float(tau)


def fewest_failures_probability(rfs: Dict[str, float], node_id: str, jobs_per_node: int,
                                model: FailureModel = FailureModel()) -> float:
    """
    二项分布下node_id的失败数不多于其他所有节点的精确概率（并列算作最少）

    Args:
        rfs: {node_id: rf}
        node_id: 目标节点
        jobs_per_node: 每个节点的作业数
        model: 失败模型

    Returns:
        概率
    """
    ks = np.arange(jobs_per_node + 1)
    target = stats.binom.pmf(ks, jobs_per_node, failure_probability(rfs[node_id], model))
    others_at_least = np.ones_like(target)
    for other, rf in rfs.items():
        if other == node_id:
            continue
        # P(X_other >= k)
        others_at_least *= stats.binom.sf(ks - 1, jobs_per_node, failure_probability(rf, model))
    return float(np.sum(target * others_at_least))

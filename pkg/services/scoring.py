"""
评分模块
自我保护能力(SPC)、节点利用率(NU)、节点可靠性(NR)、信誉权重(RW)、可靠性因子(RF)及排名
全部为纯函数，可并发调用
"""
import math
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

from models import FeedbackVector, SecurityProfile, WeightTable, check_score
from utils.exceptions import (
    ConfigurationException,
    InvalidParameterException,
    NoResourceException,
)

# 冷启动哨兵：没有任何作业记录时NR无定义
NO_HISTORY = None


class RankEntry(NamedTuple):
    rank: int
    node_id: str
    rf: float


def _mean(values: Sequence[float]) -> float:
    # fsum精确求和，结果与输入顺序无关
    return math.fsum(values) / len(values)


def compute_spc(profile: SecurityProfile) -> float:
    """
    自我保护能力 SPC = Σ Aᵢ / n

    Args:
        profile: 节点安全画像

    Returns:
        [0,1]区间的SPC
    """
    return _mean([value for _, value in profile.factors()])


def compute_weighted_spc(profile: SecurityProfile, weights: WeightTable) -> float:
    """
    加权SPC = Σ(wᵢ·Aᵢ) / Σwᵢ

    Args:
        profile: 节点安全画像
        weights: 因子权重表

    Returns:
        [0,1]区间的加权SPC
    """
    factors = profile.as_dict()
    table = weights.as_dict()
    if set(factors) != set(table):
        raise ConfigurationException(
            f"Weight table factors {sorted(table)} do not match profile factors {sorted(factors)}"
        )
    numerator = math.fsum(table[code] * value for code, value in factors.items())
    denominator = math.fsum(table.values())
    return min(1.0, max(0.0, numerator / denominator))


def compute_node_utilization(utilized: Iterable[float], tpc: float) -> float:
    """
    节点利用率 NU = Σ UPCᵢ / TPC

    Args:
        utilized: 各任务占用的算力
        tpc: 节点总算力

    Returns:
        [0,1]区间的利用率
    """
    if not tpc > 0:
        raise InvalidParameterException(f"TPC must be positive, got {tpc}")
    utilized = list(utilized)
    if any(value < 0 for value in utilized):
        raise InvalidParameterException(f"Utilized power must be non-negative: {utilized}")
    total = math.fsum(utilized)
    if total > tpc:
        raise InvalidParameterException(f"Utilized power {total} exceeds TPC {tpc}")
    return total / tpc


def compute_node_reliability(succeeded: int, submitted: int) -> Optional[float]:
    """
    节点可靠性 NR = 成功作业数 / 提交作业数

    Returns:
        [0,1]区间的NR；submitted为0时返回NO_HISTORY
    """
    if succeeded < 0 or submitted < 0:
        raise InvalidParameterException(f"Job counts must be non-negative ({succeeded}/{submitted})")
    if succeeded > submitted:
        raise InvalidParameterException(f"succeeded ({succeeded}) exceeds submitted ({submitted})")
    if submitted == 0:
        return NO_HISTORY
    return succeeded / submitted


def compute_rw(feedback: FeedbackVector) -> float:
    """信誉权重 RW = Σ Eᵢ / n"""
    if feedback is None or len(feedback) == 0:
        raise InvalidParameterException("RW needs at least one feedback attribute; use the cold-start path")
    return _mean(feedback.values)


def aggregate_feedback(vectors: Sequence[FeedbackVector]) -> FeedbackVector:
    """
    汇总多个用户的反馈：逐属性求算术平均

    Args:
        vectors: 同一节点的反馈向量列表，属性集必须一致

    Returns:
        汇总后的反馈向量，属性顺序与第一个输入一致
    """
    if not vectors:
        raise InvalidParameterException("Cannot aggregate an empty feedback list")
    names = vectors[0].names
    for vector in vectors[1:]:
        if set(vector.names) != set(names):
            raise InvalidParameterException(
                f"Heterogeneous feedback attributes: {sorted(names)} vs {sorted(vector.names)}"
            )
    tables = [vector.as_dict() for vector in vectors]
    return FeedbackVector(tuple(
        (name, _mean([table[name] for table in tables])) for name in names
    ))


def compute_rf(spc: float, rw: float) -> float:
    """可靠性因子 RF = (SPC + RW) / 2"""
    spc = check_score(spc, 'spc')
    rw = check_score(rw, 'rw')
    return (spc + rw) / 2


def rank_nodes(scores: Iterable[Tuple[str, float]]) -> List[RankEntry]:
    """
    按RF降序排名，RF相同按node_id升序，排名从1开始

    Args:
        scores: [(node_id, rf)]

    Returns:
        [RankEntry(rank, node_id, rf)]
    """
    scores = list(scores)
    node_ids = [node_id for node_id, _ in scores]
    if len(set(node_ids)) != len(node_ids):
        duplicates = sorted({node_id for node_id in node_ids if node_ids.count(node_id) > 1})
        raise InvalidParameterException(f"Duplicate node ids in ranking input: {duplicates}")
    ordered = sorted(scores, key=lambda item: (-item[1], item[0]))
    return [RankEntry(rank, node_id, rf) for rank, (node_id, rf) in enumerate(ordered, start=1)]


def select_node(ranked: Sequence[RankEntry]) -> str:
    """返回排名第一的节点"""
    if not ranked:
        raise NoResourceException("No ranked resource available for job submission")
    return ranked[0].node_id

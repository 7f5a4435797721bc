"""
领域模型
安全画像、反馈向量、节点记录、作业及实验结果
除NodeRecord外均为不可变值对象，NodeRecord只由GOM修改
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import config
from utils.exceptions import ValidationException, InvalidParameterException


def check_score(value: float, field_name: str) -> float:
    """
    校验分值位于[0,1]区间

    Args:
        value: 分值
        field_name: 字段名（用于错误信息）

    Returns:
        转换为float后的分值
    """
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationException(f"{field_name} must be a number, got {value!r}", field=field_name)
    value = float(value)
    if math.isnan(value) or value < 0.0 or value > 1.0:
        raise ValidationException(f"{field_name} must lie in [0, 1], got {value}", field=field_name)
    return value


# 因子代码 -> SecurityProfile字段名
FACTOR_FIELDS = {
    'as': 'anti_spyware',
    'avc': 'antivirus',
    'fc': 'firewall',
    'am': 'authentication',
    'bf': 'backup',
    'na': 'network_analyzer',
    'ips': 'ipsec'
}


@dataclass(frozen=True)
class SecurityProfile:
    """节点的七个自我保护因子"""
    anti_spyware: float
    antivirus: float
    firewall: float
    authentication: float
    backup: float
    network_analyzer: float
    ipsec: float

    def __post_init__(self):
        for code, name in FACTOR_FIELDS.items():
            object.__setattr__(self, name, check_score(getattr(self, name), code))

    @classmethod
    def from_factors(cls, factors: Dict[str, float]) -> 'SecurityProfile':
        """按因子代码构造（as, avc, fc, am, bf, na, ips）"""
        missing = [code for code in config.SECURITY_FACTORS if code not in factors]
        if missing:
            raise ValidationException(f"Missing security factor(s): {', '.join(missing)}", field=missing[0])
        unknown = [code for code in factors if code not in FACTOR_FIELDS]
        if unknown:
            raise ValidationException(f"Unknown security factor(s): {', '.join(unknown)}", field=unknown[0])
        return cls(**{FACTOR_FIELDS[code]: factors[code] for code in config.SECURITY_FACTORS})

    def factors(self) -> List[Tuple[str, float]]:
        """有序因子列表 [(代码, 分值)]，n由其长度得出"""
        return [(code, getattr(self, FACTOR_FIELDS[code])) for code in config.SECURITY_FACTORS]

    def as_dict(self) -> Dict[str, float]:
        return dict(self.factors())

    def replace_factor(self, code: str, value: float) -> 'SecurityProfile':
        values = self.as_dict()
        values[code] = value
        return SecurityProfile.from_factors(values)


@dataclass(frozen=True)
class WeightTable:
    """安全因子权重表，默认为参考权重"""
    weights: Tuple[Tuple[str, float], ...] = tuple(config.DEFAULT_WEIGHTS.items())

    def __post_init__(self):
        weights = tuple((str(code), float(w)) for code, w in dict(self.weights).items())
        for code, w in weights:
            if math.isnan(w) or w <= 0.0 or w > 1.0:
                raise ValidationException(f"weight for {code} must lie in (0, 1], got {w}", field=code)
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def from_mapping(cls, weights: Dict[str, float]) -> 'WeightTable':
        return cls(tuple(weights.items()))

    @classmethod
    def uniform(cls, value: float = 1.0) -> 'WeightTable':
        return cls(tuple((code, value) for code in config.SECURITY_FACTORS))

    def as_dict(self) -> Dict[str, float]:
        return dict(self.weights)


@dataclass(frozen=True)
class FeedbackVector:
    """
    一个用户对一个节点的反馈：有序的 (属性名, 分值) 列表
    属性集开放，以便原样表示八列的参考反馈数据
    """
    scores: Tuple[Tuple[str, float], ...]

    def __post_init__(self):
        pairs = tuple((str(name), check_score(score, str(name))) for name, score in self.scores)
        if not pairs:
            raise InvalidParameterException("FeedbackVector needs at least one attribute")
        names = [name for name, _ in pairs]
        if len(set(names)) != len(names):
            raise ValidationException(f"Duplicate attribute names in feedback: {names}")
        object.__setattr__(self, 'scores', pairs)

    @classmethod
    def from_mapping(cls, scores: Dict[str, float]) -> 'FeedbackVector':
        return cls(tuple(scores.items()))

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.scores)

    @property
    def values(self) -> Tuple[float, ...]:
        return tuple(score for _, score in self.scores)

    def get(self, name: str) -> Optional[float]:
        return dict(self.scores).get(name)

    def as_dict(self) -> Dict[str, float]:
        return dict(self.scores)

    def with_overrides(self, overrides: Dict[str, float]) -> 'FeedbackVector':
        """覆盖（或追加）部分属性，保持原有顺序"""
        merged = dict(self.scores)
        merged.update(overrides)
        return FeedbackVector(tuple(merged.items()))

    def __len__(self) -> int:
        return len(self.scores)


@dataclass
class NodeRecord:
    """已注册节点的状态，只由GridOrganizationManager修改"""
    node_id: str
    profile: SecurityProfile
    total_power_compute: float
    aggregated_feedback: Optional[FeedbackVector] = None
    spc: Optional[float] = None
    rw: Optional[float] = None
    rf: Optional[float] = None
    jobs_submitted: int = 0
    jobs_succeeded: int = 0
    jobs_completed: int = 0
    utilized_power_log: List[float] = field(default_factory=list)

    @property
    def provisional(self) -> bool:
        """没有RW（既无反馈也无作业记录）的冷启动节点"""
        return self.rw is None

    @property
    def jobs_failed(self) -> int:
        return self.jobs_completed - self.jobs_succeeded

    def check_invariants(self):
        if not 0 <= self.jobs_succeeded <= self.jobs_completed <= self.jobs_submitted:
            raise InvalidParameterException(
                f"{self.node_id}: counters out of order "
                f"(succeeded={self.jobs_succeeded}, completed={self.jobs_completed}, submitted={self.jobs_submitted})"
            )
        if sum(self.utilized_power_log) > self.total_power_compute:
            raise InvalidParameterException(f"{self.node_id}: utilized power exceeds TPC")
        if self.rf is not None and self.rw is not None and self.spc is not None:
            if abs(self.rf - (self.spc + self.rw) / 2) > config.RF_TOLERANCE:
                raise InvalidParameterException(f"{self.node_id}: rf is not the midpoint of spc and rw")


@dataclass(frozen=True)
class JobSpec:
    job_id: str
    required_power: float
    metadata: Tuple[Tuple[str, str], ...] = ()

    def __post_init__(self):
        if not self.required_power > 0:
            raise InvalidParameterException(f"Job {self.job_id}: required_power must be positive, got {self.required_power}")


@dataclass(frozen=True)
class JobOutcome:
    job_id: str
    node_id: str
    success: bool
    utilized_power: float = 0.0

    def __post_init__(self):
        if self.utilized_power < 0:
            raise InvalidParameterException(f"Job {self.job_id}: utilized_power must be non-negative")


@dataclass(frozen=True)
class SnapshotRow:
    """快照中的一行：节点的SPC、RW、RF及排名"""
    node_id: str
    spc: float
    rw: Optional[float]
    rf: float
    rank: Optional[int]
    provisional: bool


@dataclass
class ExperimentResult:
    """
    实验结果：各检查点上每个节点的累计失败数和已分配作业数
    """
    checkpoints: List[int]
    failures: Dict[str, List[int]]
    assigned: Dict[str, List[int]]
    seed: int = 0
    alpha: float = 1.0
    generator: str = config.RNG_ALGORITHM
    mode: str = config.SIM_MODE
    feedback_loop: bool = False

    @property
    def node_ids(self) -> List[str]:
        return sorted(self.assigned)

    def final_counts(self) -> Dict[str, Tuple[int, int]]:
        """最后一个检查点上的 (累计失败, 已分配)"""
        if not self.checkpoints:
            return {node_id: (0, 0) for node_id in self.node_ids}
        return {node_id: (self.failures[node_id][-1], self.assigned[node_id][-1]) for node_id in self.node_ids}

    def rows(self) -> Iterable[Tuple[int, str, int, int]]:
        """按 (checkpoint, node_id) 排序的行"""
        for index, checkpoint in enumerate(self.checkpoints):
            for node_id in self.node_ids:
                yield checkpoint, node_id, self.failures[node_id][index], self.assigned[node_id][index]

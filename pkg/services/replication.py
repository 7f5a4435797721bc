"""
参考分值复现
用内置的安全因子和反馈数据重新计算SPC、RW、RF，与印刷值逐项对照
以独立重算结果为准，印刷值不一致时只标记、不修正
"""
from decimal import Decimal, ROUND_DOWN, ROUND_HALF_UP
from typing import Dict, List, Optional, Sequence

import numpy as np

import config
from data_io import NodeFixture, load_node_fixture, load_reference_tables
from grid_manager import GridOrganizationManager
from utils.logger import get_logger

logger = get_logger('replication')


def matches_printed(computed: float, printed: str) -> bool:
    """
    计算值是否与印刷值一致
    在容差内，或按印刷位数四舍五入/截断后相等，都算一致

    Args:
        computed: 计算值
        printed: 印刷值原文（如 ".564"）
    """
    value = Decimal(printed)
    quantum = Decimal(1).scaleb(value.as_tuple().exponent)
    candidate = Decimal(repr(float(computed)))
    return (
        abs(computed - float(value)) <= config.PRINTED_TOLERANCE
        or candidate.quantize(quantum, rounding=ROUND_HALF_UP) == value
        or candidate.quantize(quantum, rounding=ROUND_DOWN) == value
    )


def _oracle(nodes: Sequence[NodeFixture]) -> Dict[str, Dict[str, Optional[float]]]:
    """独立重算：直接对表格行求均值"""
    values = {}
    for node_id, profile, feedback, _ in nodes:
        spc = float(np.mean([value for _, value in profile.factors()]))
        rw = float(np.mean(feedback.values)) if feedback is not None else None
        values[node_id] = {'spc': spc, 'rw': rw, 'rf': (spc + rw) / 2 if rw is not None else spc}
    return values


class TableReplication:
    """参考分值复现报告"""

    def __init__(self, nodes: Sequence[NodeFixture] = None, printed: Dict[str, Dict[str, str]] = None):
        self.nodes = list(nodes) if nodes is not None else load_node_fixture(config.REFERENCE_NODES_FIXTURE)
        self.printed = printed if printed is not None else load_reference_tables()['printed']

    def run(self) -> Dict:
        """
        生成复现报告

        Returns:
            {
                'rows': 每个节点的计算值与印刷值,
                'flags': 计算值与印刷值不一致的 (node_id, 列, 计算值, 印刷值),
                'notes': 印刷表自身不一致的说明,
                'oracle_ok': 计算值是否与独立重算一致
            }
        """
        gom = GridOrganizationManager.from_fixture(self.nodes)
        snapshot = {row.node_id: row for row in gom.snapshot()}
        oracle = _oracle(self.nodes)

        rows: List[Dict] = []
        flags = []
        notes = []
        oracle_ok = True

        for node_id, _, _, _ in self.nodes:
            computed = snapshot[node_id]
            printed = self.printed.get(node_id)
            row = {
                'node_id': node_id,
                'spc': computed.spc,
                'rw': computed.rw,
                'rf': computed.rf,
                'rank': computed.rank,
                'printed': printed,
                'flags': []
            }

            for column in ('spc', 'rw', 'rf'):
                expected = oracle[node_id][column]
                actual = getattr(computed, column)
                if (expected is None) != (actual is None) or (
                        expected is not None and abs(expected - actual) > config.RF_TOLERANCE):
                    oracle_ok = False
                    logger.warning(f"{node_id} {column}: computed {actual} differs from oracle {expected}")

            if printed is not None:
                for column in ('spc', 'rw'):
                    actual = getattr(computed, column)
                    if actual is not None and not matches_printed(actual, printed[column]):
                        row['flags'].append(column)
                        flags.append((node_id, column, actual, printed[column]))

                midpoint = (float(printed['spc']) + float(printed['rw'])) / 2
                if not matches_printed(midpoint, printed['rf']):
                    notes.append(
                        f"{node_id}: printed RF {printed['rf']} is not the midpoint of the printed "
                        f"SPC {printed['spc']} and RW {printed['rw']} ({midpoint:.4f})"
                    )
            rows.append(row)

        logger.info(f"Replicated {len(rows)} node(s): {len(flags)} discrepancy flag(s), oracle_ok={oracle_ok}")
        return {'rows': rows, 'flags': flags, 'notes': notes, 'oracle_ok': oracle_ok}

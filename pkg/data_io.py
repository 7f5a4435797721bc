"""
数据文件读写
节点数据文件(YAML)、实验结果CSV、快照CSV，以及内置参考数据的摘要校验
所有文件均为UTF-8编码、LF换行
"""
import csv
import hashlib
import io
from decimal import Decimal, ROUND_HALF_EVEN
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import yaml

import config
from models import ExperimentResult, FeedbackVector, SecurityProfile, SnapshotRow, WeightTable
from utils.exceptions import DataIOException, FixtureParseException, ValidationException
from utils.logger import get_logger

PathLike = Union[str, Path]
NodeFixture = Tuple[str, SecurityProfile, Optional[FeedbackVector], float]

RESULTS_HEADER = ['checkpoint', 'node_id', 'cum_failures', 'jobs_assigned']
SNAPSHOT_HEADER = ['rank', 'node_id', 'spc', 'rw', 'rf', 'provisional']

_LINES_KEY = '__lines__'

logger = get_logger('io')


class _LineLoader(yaml.SafeLoader):
    """记录每个键所在行号的YAML加载器"""


def _construct_mapping(loader, node, deep=False):
    mapping = loader.construct_mapping(node, deep=True)
    mapping[_LINES_KEY] = {
        loader.construct_object(key_node): key_node.start_mark.line + 1
        for key_node, _ in node.value
    }
    mapping[_LINES_KEY]['__self__'] = node.start_mark.line + 1
    return mapping


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


# ============ 路径 ============

def resolve_fixture(name_or_path: PathLike) -> Path:
    """
    解析节点数据文件：已存在的路径直接返回，否则按内置数据名查找

    Args:
        name_or_path: 文件路径或内置数据名（如 paper_nodes）
    """
    path = Path(name_or_path)
    if path.is_file():
        return path
    bundled = config.FIXTURE_DIR / f"{name_or_path}.yaml"
    if bundled.is_file():
        return bundled
    raise DataIOException("fixture not found", path)


def _read_yaml(path: Path):
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise DataIOException(f"cannot read file: {e.strerror or e}", path) from e
    except UnicodeDecodeError as e:
        raise FixtureParseException("not valid UTF-8", path) from e
    try:
        return yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        line = mark.line + 1 if mark is not None else None
        raise FixtureParseException(f"invalid YAML: {getattr(e, 'problem', e)}", path, line=line) from e


def _lines(mapping: Dict) -> Dict:
    return mapping.get(_LINES_KEY, {}) if isinstance(mapping, dict) else {}


def _strip(mapping: Dict) -> Dict:
    return {key: value for key, value in mapping.items() if key != _LINES_KEY}


# ============ 节点数据文件 ============

def _parse_scores(section, section_name: str, path: Path, parent_line: int) -> Dict[str, float]:
    if not isinstance(section, dict):
        raise FixtureParseException(f"'{section_name}' must be a mapping", path, line=parent_line, field=section_name)
    lines = _lines(section)
    scores = {}
    for key, value in _strip(section).items():
        key = str(key)
        line = lines.get(key, parent_line)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise FixtureParseException(f"{key.upper()} must be a number, got {value!r}", path, line=line, field=key)
        if not 0.0 <= float(value) <= 1.0:
            raise FixtureParseException(f"{key.upper()} = {value} outside [0, 1]", path, line=line, field=key)
        scores[key] = float(value)
    return scores


def _parse_node(entry, path: Path, index: int) -> NodeFixture:
    if not isinstance(entry, dict):
        raise FixtureParseException(f"node #{index} must be a mapping", path, field='nodes')
    lines = _lines(entry)
    line = lines.get('__self__')

    node_id = entry.get('id')
    if node_id is None or str(node_id) == '':
        raise FixtureParseException(f"node #{index} has no id", path, line=line, field='id')
    node_id = str(node_id)

    tpc = entry.get('tpc', config.DEFAULT_TPC)
    if isinstance(tpc, bool) or not isinstance(tpc, (int, float)) or not tpc > 0:
        raise FixtureParseException(f"tpc must be a positive number, got {tpc!r}", path,
                                    line=lines.get('tpc', line), field='tpc')

    if 'security' not in entry:
        raise FixtureParseException(f"node {node_id} has no security section", path, line=line, field='security')
    security = _parse_scores(entry['security'], 'security', path, lines.get('security', line))
    security_lines = _lines(entry['security'])
    try:
        profile = SecurityProfile.from_factors(security)
    except ValidationException as e:
        raise FixtureParseException(str(e), path, line=security_lines.get(e.field, lines.get('security', line)),
                                    field=e.field) from e

    feedback = None
    if entry.get('feedback') is not None:
        scores = _parse_scores(entry['feedback'], 'feedback', path, lines.get('feedback', line))
        if not scores:
            raise FixtureParseException(f"node {node_id} has an empty feedback section", path,
                                        line=lines.get('feedback', line), field='feedback')
        feedback = FeedbackVector.from_mapping(scores)

    return node_id, profile, feedback, float(tpc)


def load_node_fixture(path: PathLike) -> List[NodeFixture]:
    """
    读取节点数据文件

    Args:
        path: 文件路径或内置数据名

    Returns:
        [(node_id, SecurityProfile, FeedbackVector或None, tpc)]
    """
    path = resolve_fixture(path)
    document = _read_yaml(path)
    if document is None:
        return []
    if not isinstance(document, dict):
        raise FixtureParseException("top level must be a mapping with a 'nodes' list", path, line=1)

    entries = document.get('nodes') or []
    if not isinstance(entries, list):
        raise FixtureParseException("'nodes' must be a list", path, line=_lines(document).get('nodes'), field='nodes')

    nodes = []
    seen = set()
    for index, entry in enumerate(entries, start=1):
        node = _parse_node(entry, path, index)
        if node[0] in seen:
            raise FixtureParseException(f"duplicate node id {node[0]}", path,
                                        line=_lines(entry).get('id'), field='id')
        seen.add(node[0])
        nodes.append(node)

    logger.debug(f"Loaded {len(nodes)} node(s) from {path}")
    return nodes


def write_node_fixture(nodes: Sequence[NodeFixture], path: PathLike):
    """把节点记录写成load_node_fixture可读的YAML"""
    document = {'nodes': []}
    for node_id, profile, feedback, tpc in nodes:
        entry = {'id': node_id, 'tpc': tpc, 'security': profile.as_dict()}
        if feedback is not None:
            entry['feedback'] = feedback.as_dict()
        document['nodes'].append(entry)
    _write_text(path, yaml.safe_dump(document, sort_keys=False, allow_unicode=True))


def load_weight_table(path: PathLike) -> WeightTable:
    """读取权重表，格式为 {weights: {as: 0.82, ...}} 或直接的映射"""
    path = Path(path)
    document = _read_yaml(path)
    if not isinstance(document, dict):
        raise FixtureParseException("weight table must be a mapping", path, line=1)
    section = document.get('weights', document)
    if not isinstance(section, dict):
        raise FixtureParseException("weights must be a mapping of factor to weight", path,
                                    line=_lines(document).get('weights', 1), field='weights')
    lines = _lines(section)
    weights = _strip(section)
    try:
        return WeightTable.from_mapping({str(code): weight for code, weight in weights.items()})
    except (ValidationException, TypeError, ValueError) as e:
        field = getattr(e, 'field', None)
        raise FixtureParseException(str(e), path, line=lines.get(field), field=field) from e


def load_reference_tables() -> Dict:
    """
    读取内置的参考权重和印刷分值

    Returns:
        {'weights': WeightTable, 'printed': {node_id: {'spc': str, 'rw': str, 'rf': str}}}
    """
    path = resolve_fixture(config.REFERENCE_TABLES_FIXTURE)
    document = _read_yaml(path)
    printed = {}
    for row in document['printed']:
        # 保留印刷值的原始字符串，以便得知小数位数
        printed[str(row['id'])] = {column: str(row[column]) for column in ('spc', 'rw', 'rf')}
    return {
        'weights': WeightTable.from_mapping(_strip(document['weights'])),
        'printed': printed
    }


# ============ 摘要校验 ============

def fixture_digest(path: PathLike) -> str:
    """文件的SHA-256摘要"""
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as e:
        raise DataIOException(f"cannot read file: {e.strerror or e}", path) from e


def pinned_digests() -> Dict[str, str]:
    """读取SHA256SUMS中固定的摘要 {文件名: 摘要}"""
    pinned = {}
    try:
        text = config.FIXTURE_DIGEST_FILE.read_text(encoding='utf-8')
    except OSError as e:
        raise DataIOException(f"cannot read digest file: {e.strerror or e}", config.FIXTURE_DIGEST_FILE) from e
    for line in text.splitlines():
        if line.strip():
            digest, name = line.split(maxsplit=1)
            pinned[name.strip().lstrip('*')] = digest
    return pinned


def verify_fixture_digests() -> Dict[str, bool]:
    """逐个校验内置数据文件是否与固定摘要一致"""
    return {
        name: fixture_digest(config.FIXTURE_DIR / name) == digest
        for name, digest in pinned_digests().items()
    }


# ============ CSV ============

def _write_text(path: PathLike, text: str):
    try:
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
    except OSError as e:
        raise DataIOException(f"cannot write file: {e.strerror or e}", path) from e


def _read_csv(path: PathLike, header: List[str]) -> List[Dict[str, str]]:
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            reader = csv.DictReader(f)
            if reader.fieldnames != header:
                raise DataIOException(f"unexpected header {reader.fieldnames}, expected {header}", path)
            return list(reader)
    except OSError as e:
        raise DataIOException(f"cannot read file: {e.strerror or e}", path) from e


def format_score(value: Optional[float], decimals: int = config.SNAPSHOT_DECIMALS) -> str:
    """按四位小数、银行家舍入输出分值；None输出为空"""
    if value is None:
        return ''
    quantum = Decimal(1).scaleb(-decimals)
    return str(Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_EVEN))


def render_results_csv(result: ExperimentResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(RESULTS_HEADER)
    for checkpoint, node_id, failures, assigned in result.rows():
        writer.writerow([checkpoint, node_id, failures, assigned])
    return buffer.getvalue()


def write_results_csv(result: ExperimentResult, path: PathLike):
    """写出实验结果：checkpoint,node_id,cum_failures,jobs_assigned"""
    _write_text(path, render_results_csv(result))


def read_results_csv(path: PathLike) -> ExperimentResult:
    """读回write_results_csv写出的文件（只恢复计数）"""
    checkpoints: List[int] = []
    failures: Dict[str, List[int]] = {}
    assigned: Dict[str, List[int]] = {}
    for row in _read_csv(path, RESULTS_HEADER):
        checkpoint = int(row['checkpoint'])
        if not checkpoints or checkpoints[-1] != checkpoint:
            checkpoints.append(checkpoint)
        failures.setdefault(row['node_id'], []).append(int(row['cum_failures']))
        assigned.setdefault(row['node_id'], []).append(int(row['jobs_assigned']))
    return ExperimentResult(checkpoints=checkpoints, failures=failures, assigned=assigned)


def render_snapshot_csv(snapshot: Sequence[SnapshotRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(SNAPSHOT_HEADER)
    for row in snapshot:
        writer.writerow([
            '' if row.rank is None else row.rank,
            row.node_id,
            format_score(row.spc),
            format_score(row.rw),
            format_score(row.rf),
            'true' if row.provisional else 'false'
        ])
    return buffer.getvalue()


def write_snapshot_csv(snapshot: Sequence[SnapshotRow], path: PathLike):
    """写出快照：rank,node_id,spc,rw,rf,provisional"""
    _write_text(path, render_snapshot_csv(snapshot))


def read_snapshot_csv(path: PathLike) -> List[SnapshotRow]:
    rows = []
    for row in _read_csv(path, SNAPSHOT_HEADER):
        rows.append(SnapshotRow(
            node_id=row['node_id'],
            spc=float(row['spc']),
            rw=float(row['rw']) if row['rw'] else None,
            rf=float(row['rf']),
            rank=int(row['rank']) if row['rank'] else None,
            provisional=row['provisional'] == 'true'
        ))
    return rows

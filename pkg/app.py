"""
命令行入口
score / rank / simulate / replicate-paper / verify-fixtures
输出只取决于参数、输入文件和种子
退出码：0 成功，1 对照校验失败，2 输入错误，3 无可用资源
"""
import argparse
import sys
from typing import List, Optional, Sequence

import config
from data_io import (
    load_node_fixture,
    load_weight_table,
    render_snapshot_csv,
    format_score,
    verify_fixture_digests,
    write_results_csv,
)
from grid_manager import GridOrganizationManager
from models import SnapshotRow, WeightTable
from services.replication import TableReplication
from services.simulator import (
    FailureModel,
    SimConfig,
    failure_summary,
    rank_correlation,
    run_experiment,
)
from utils.exceptions import GridBrokerException, NoResourceException
from utils.logger import logger


# ============ Helper Functions ============

def _weights_from_args(args) -> Optional[WeightTable]:
    """--weights 指定文件时隐含加权模式；只给 --weighted 时用默认权重"""
    if getattr(args, 'weights', None):
        return load_weight_table(args.weights)
    if getattr(args, 'weighted', False):
        return WeightTable()
    return None


def _build_manager(args) -> GridOrganizationManager:
    nodes = load_node_fixture(args.nodes)
    return GridOrganizationManager.from_fixture(
        nodes,
        weights=_weights_from_args(args),
        admit_provisional=getattr(args, 'admit_provisional', config.ADMIT_PROVISIONAL)
    )


def _format_table(snapshot: Sequence[SnapshotRow]) -> str:
    lines = [f"{'Rank':>4}  {'Node':<10}  {'SPC':>6}  {'RW':>6}  {'RF':>6}  Provisional"]
    for row in snapshot:
        rank = '-' if row.rank is None else str(row.rank)
        rw = format_score(row.rw) or '-'
        lines.append(
            f"{rank:>4}  {row.node_id:<10}  {format_score(row.spc):>6}  {rw:>6}  "
            f"{format_score(row.rf):>6}  {'yes' if row.provisional else 'no'}"
        )
    return '\n'.join(lines)


def _parse_checkpoints(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"checkpoints must be comma-separated integers, got {text!r}")


# ============ Commands ============

def cmd_score(args) -> int:
    """打印每个节点的SPC、RW、RF"""
    gom = _build_manager(args)
    print(_format_table(gom.snapshot()))
    logger.info(f"Scored {len(gom.registry)} node(s)")
    return config.EXIT_OK


def cmd_rank(args) -> int:
    """按RF降序输出快照CSV"""
    gom = _build_manager(args)
    sys.stdout.write(render_snapshot_csv(gom.snapshot()))
    return config.EXIT_OK


def cmd_simulate(args) -> int:
    """运行失败率实验，写出CSV并打印各节点失败率"""
    nodes = load_node_fixture(args.nodes)
    sim_config = SimConfig(
        total_jobs=args.jobs,
        checkpoints=tuple(args.checkpoints) if args.checkpoints is not None else None,
        seed=args.seed,
        assignment_mode=args.mode,
        failure_model=FailureModel(alpha=args.alpha),
        feedback_loop=args.feedback_loop
    )
    settings = {'weights': _weights_from_args(args), 'admit_provisional': args.admit_provisional}
    result = run_experiment(sim_config, nodes, **settings)
    if args.out:
        write_results_csv(result, args.out)

    rfs = {row.node_id: row.rf for row in GridOrganizationManager.from_fixture(nodes, **settings).snapshot()}
    print(f"{'Node':<10}  {'RF':>6}  {'Failures':>8}  {'Assigned':>8}  {'Rate':>6}")
    for item in failure_summary(result):
        print(f"{item['node_id']:<10}  {format_score(rfs[item['node_id']]):>6}  {item['failures']:>8}  "
              f"{item['assigned']:>8}  {format_score(item['failure_rate']):>6}")
    print(f"seed={result.seed} alpha={result.alpha} mode={result.mode} "
          f"feedback_loop={'on' if result.feedback_loop else 'off'} generator={result.generator}")
    if result.checkpoints and len(rfs) > 1:
        tau = rank_correlation(result, rfs)
        print(f"kendall_tau(rf, failures)={'n/a' if tau is None else f'{tau:.4f}'}")
    return config.EXIT_OK


def cmd_replicate_paper(args) -> int:
    """重算参考分值并与印刷值对照"""
    report = TableReplication().run()
    print(f"{'Node':<6}  {'SPC':>6} {'printed':>7}  {'RW':>6} {'printed':>7}  {'RF':>6} {'printed':>7}  Flags")
    for row in report['rows']:
        printed = row['printed'] or {'spc': '-', 'rw': '-', 'rf': '-'}
        flags = ','.join(f"{column.upper()} MISMATCH" for column in row['flags'])
        print(f"{row['node_id']:<6}  {format_score(row['spc']):>6} {printed['spc']:>7}  "
              f"{format_score(row['rw']) or '-':>6} {printed['rw']:>7}  "
              f"{format_score(row['rf']):>6} {printed['rf']:>7}  {flags}")
    print(f"Flagged discrepancies: {len(report['flags'])}")
    for node_id, column, computed, printed in report['flags']:
        print(f"  {node_id} {column.upper()}: computed {format_score(computed)}, printed {printed}")
    for note in report['notes']:
        print(f"Note: {note}")
    print(f"Oracle check: {'passed' if report['oracle_ok'] else 'FAILED'}")
    return config.EXIT_OK if report['oracle_ok'] else config.EXIT_CHECK_FAILED


def cmd_verify_fixtures(args) -> int:
    """校验内置数据文件的摘要"""
    results = verify_fixture_digests()
    for name, ok in sorted(results.items()):
        print(f"{name}: {'OK' if ok else 'DIGEST MISMATCH'}")
    return config.EXIT_OK if all(results.values()) else config.EXIT_INPUT_ERROR


# ============ Parser ============

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='grid-broker',
        description='Reliability and reputation aware resource selection for computational grids.'
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    def add_node_options(sub):
        sub.add_argument('--nodes', default=config.REFERENCE_NODES_FIXTURE,
                         help='Node fixture path or bundled fixture name (default: paper_nodes).')
        sub.add_argument('--weighted', action='store_true',
                         help='Use the weighted SPC with the default weight table.')
        sub.add_argument('--weights', help='YAML weight table; implies --weighted.')
        sub.add_argument('--admit-provisional', action='store_true', default=config.ADMIT_PROVISIONAL,
                         help='Rank nodes without reputation at RF = SPC.')

    score = subparsers.add_parser('score', help='Print SPC, RW and RF per node.')
    add_node_options(score)
    score.set_defaults(handler=cmd_score)

    rank = subparsers.add_parser('rank', help='Print the ranking snapshot as CSV.')
    add_node_options(rank)
    rank.set_defaults(handler=cmd_rank)

    simulate = subparsers.add_parser('simulate', help='Run the seeded failure-rate experiment.')
    add_node_options(simulate)
    simulate.add_argument('--jobs', type=int, default=config.SIM_TOTAL_JOBS)
    simulate.add_argument('--seed', type=int, default=config.SIM_SEED)
    simulate.add_argument('--alpha', type=float, default=config.SIM_ALPHA)
    simulate.add_argument('--mode', choices=config.SIM_MODES, default=config.SIM_MODE)
    simulate.add_argument('--checkpoints', type=_parse_checkpoints,
                          help='Comma-separated job-count marks (default: evenly spaced).')
    simulate.add_argument('--feedback-loop', action='store_true',
                          help='Feed outcomes back into NR/RW/RF during the run.')
    simulate.add_argument('--out', help='Result CSV path.')
    simulate.set_defaults(handler=cmd_simulate)

    replicate = subparsers.add_parser('replicate-paper',
                                      help='Recompute the reference scores and flag printed discrepancies.')
    replicate.set_defaults(handler=cmd_replicate_paper)

    verify = subparsers.add_parser('verify-fixtures', help='Check bundled fixtures against pinned digests.')
    verify.set_defaults(handler=cmd_verify_fixtures)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except NoResourceException as e:
        print(f"error: {e}", file=sys.stderr)
        return config.EXIT_NO_RESOURCE
    except GridBrokerException as e:
        print(f"error: {e}", file=sys.stderr)
        return config.EXIT_INPUT_ERROR


if __name__ == '__main__':
    sys.exit(main())

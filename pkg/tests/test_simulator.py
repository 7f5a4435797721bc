import numpy as np
import pytest

from data_io import load_node_fixture
from grid_manager import GridOrganizationManager
from models import ExperimentResult
from services.simulator import (
    FailureModel,
    SimConfig,
    default_checkpoints,
    failure_probability,
    failure_summary,
    fewest_failures_probability,
    generate_workload,
    rank_correlation,
    run_experiment,
)
from utils.exceptions import ConfigurationException, NoResourceException, ValidationException
from utils.logger import quiet

JOBS_PER_NODE = 1000
NODE_IDS = ('N1', 'N2', 'N3', 'N4', 'N5', 'N6', 'N7')


@pytest.fixture(scope='module')
def fixture_rfs():
    gom = GridOrganizationManager.from_fixture(load_node_fixture('paper_nodes'))
    return {row.node_id: row.rf for row in gom.snapshot()}


@pytest.fixture(scope='module')
def seed_sweep():
    nodes = load_node_fixture('paper_nodes')
    results = []
    with quiet():
        for seed in range(100):
            sim_config = SimConfig(total_jobs=JOBS_PER_NODE * len(nodes), seed=seed, assignment_mode='round_robin',
                                   checkpoints=(JOBS_PER_NODE * len(nodes),))
            results.append(run_experiment(sim_config, nodes))
    return results


# ============ 失败模型 ============

@pytest.mark.parametrize('rf, alpha, expected', [
    (1.0, 1.0, 0.0),
    (0.0, 1.0, 1.0),
    (0.607, 1.0, 0.393),
    (0.2, 2.0, 1.0),
    (0.9, 0.5, 0.05),
])
def test_failure_probability(rf, alpha, expected):
    assert failure_probability(rf, FailureModel(alpha)) == pytest.approx(expected)


def test_failure_model_rejects_non_positive_alpha():
    with pytest.raises(ConfigurationException):
        FailureModel(0.0)
    with pytest.raises(ValidationException):
        failure_probability(1.5, FailureModel())


# ============ 配置与工作负载 ============

def test_default_checkpoints():
    assert default_checkpoints(1000) == tuple(range(100, 1001, 100))
    assert default_checkpoints(3) == (1, 2, 3)
    assert default_checkpoints(0) == ()


@pytest.mark.parametrize('kwargs', [
    {'total_jobs': -1},
    {'assignment_mode': 'random'},
    {'seed': -1},
    {'seed': 2 ** 64},
    {'total_jobs': 10, 'checkpoints': (5, 5)},
    {'total_jobs': 10, 'checkpoints': (20,)},
])
def test_sim_config_validation(kwargs):
    with pytest.raises(ConfigurationException):
        SimConfig(**kwargs)


def test_workload_is_seeded():
    first = generate_workload(50, seed=7)
    assert first == generate_workload(50, seed=7)
    assert first != generate_workload(50, seed=8)
    assert len({job.job_id for job in first}) == 50
    assert all(1.0 <= job.required_power <= 10.0 for job in first)
    assert generate_workload(0, seed=7) == []


# ============ 实验 ============

def test_experiment_is_reproducible(reference_nodes):
    sim_config = SimConfig(total_jobs=700, seed=11, assignment_mode='round_robin')
    first = run_experiment(sim_config, reference_nodes)
    second = run_experiment(sim_config, reference_nodes)
    assert list(first.rows()) == list(second.rows())
    assert first.generator == 'numpy.random.PCG64'


def test_zero_jobs(reference_nodes):
    result = run_experiment(SimConfig(total_jobs=0), reference_nodes)
    assert result.checkpoints == []
    assert list(result.rows()) == []
    assert all(item['failures'] == 0 for item in failure_summary(result))


def test_zero_jobs_with_checkpoint_zero(reference_nodes):
    result = run_experiment(SimConfig(total_jobs=0, checkpoints=(0,)), reference_nodes)
    assert list(result.rows()) == [(0, node_id, 0, 0) for node_id in NODE_IDS]


def test_no_nodes():
    with pytest.raises(NoResourceException):
        run_experiment(SimConfig(total_jobs=5), [])


def test_broker_mode_sends_everything_to_n6(reference_nodes):
    result = run_experiment(SimConfig(total_jobs=200, seed=3), reference_nodes)
    counts = result.final_counts()
    assert counts['N6'][1] == 200
    assert all(assigned == 0 for node_id, (_, assigned) in counts.items() if node_id != 'N6')


def test_counts_are_conserved_and_non_decreasing(reference_nodes):
    result = run_experiment(SimConfig(total_jobs=700, seed=5, assignment_mode='round_robin'), reference_nodes)
    for index, checkpoint in enumerate(result.checkpoints):
        assert sum(result.assigned[node_id][index] for node_id in result.node_ids) == checkpoint
    for node_id in result.node_ids:
        assert result.failures[node_id] == sorted(result.failures[node_id])
        assert result.assigned[node_id] == sorted(result.assigned[node_id])
        assert all(f <= a for f, a in zip(result.failures[node_id], result.assigned[node_id]))


def test_round_robin_failure_fraction_tracks_rf(reference_nodes, fixture_rfs):
    total = JOBS_PER_NODE * len(reference_nodes)
    result = run_experiment(SimConfig(total_jobs=total, seed=42, assignment_mode='round_robin'), reference_nodes)
    for item in failure_summary(result):
        assert item['assigned'] == JOBS_PER_NODE
        assert item['failure_rate'] == pytest.approx(1 - fixture_rfs[item['node_id']], abs=0.05)


def test_feedback_loop_spreads_broker_jobs(reference_nodes):
    result = run_experiment(SimConfig(total_jobs=300, seed=9, failure_model=FailureModel(2.0), feedback_loop=True),
                            reference_nodes)
    counts = result.final_counts()
    assert sum(assigned for _, assigned in counts.values()) == 300
    assert sum(1 for _, assigned in counts.values() if assigned > 0) > 1


def test_feedback_loop_is_reproducible(reference_nodes):
    sim_config = SimConfig(total_jobs=300, seed=9, feedback_loop=True)
    assert list(run_experiment(sim_config, reference_nodes).rows()) == list(run_experiment(sim_config, reference_nodes).rows())


# ============ 统计判据 ============

def test_fewest_failures_oracle(fixture_rfs):
    probability = fewest_failures_probability(fixture_rfs, 'N6', JOBS_PER_NODE)
    assert 0.95 <= probability <= 1.0
    others = [fewest_failures_probability(fixture_rfs, node_id, JOBS_PER_NODE)
              for node_id in fixture_rfs if node_id != 'N6']
    assert max(others) < 0.05


def test_fewest_failures_oracle_is_a_distribution():
    rfs = {'A': 0.9, 'B': 0.5}
    # 两个节点时，恰好并列的情形被重复计入
    total = fewest_failures_probability(rfs, 'A', 5) + fewest_failures_probability(rfs, 'B', 5)
    assert total >= 1.0 - 1e-12


def test_n6_records_fewest_failures_across_seeds(seed_sweep):
    wins = 0
    for result in seed_sweep:
        counts = result.final_counts()
        fewest = min(failures for failures, _ in counts.values())
        wins += counts['N6'][0] == fewest
    assert wins >= 95


def test_rf_and_failures_are_anti_correlated(seed_sweep, fixture_rfs):
    taus = [rank_correlation(result, fixture_rfs) for result in seed_sweep]
    assert np.mean(taus) <= -0.8



def test_rank_correlation_is_undefined_when_failures_tie(fixture_rfs):
    flat = ExperimentResult(checkpoints=[7], failures={node_id: [3] for node_id in NODE_IDS},
                            assigned={node_id: [7] for node_id in NODE_IDS})
    assert rank_correlation(flat, fixture_rfs) is None

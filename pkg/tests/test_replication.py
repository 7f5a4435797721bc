import pytest

from services.replication import TableReplication, matches_printed


@pytest.fixture(scope='module')
def report():
    return TableReplication().run()


@pytest.mark.parametrize('computed, printed, expected', [
    (0.5642857142857143, '.564', True),
    (3.7 / 7, '.528', True),
    (0.4675, '.467', True),
    (0.34, '.34', True),
    (0.29625, '.281', False),
    (0.56, '.565', False),
    (0.6514285714285715, '.654', False),
])
def test_matches_printed(computed, printed, expected):
    assert matches_printed(computed, printed) is expected


def test_report_covers_every_node(report):
    assert [row['node_id'] for row in report['rows']] == ['N1', 'N2', 'N3', 'N4', 'N5', 'N6', 'N7']
    assert report['oracle_ok']


def test_exactly_three_discrepancies(report):
    assert [(node_id, column) for node_id, column, _, _ in report['flags']] == [
        ('N1', 'rw'), ('N4', 'rw'), ('N6', 'spc')
    ]
    flagged = {row['node_id']: row['flags'] for row in report['rows'] if row['flags']}
    assert flagged == {'N1': ['rw'], 'N4': ['rw'], 'N6': ['spc']}


def test_recomputed_values_win_over_printed_ones(report):
    rows = {row['node_id']: row for row in report['rows']}
    assert rows['N1']['rw'] == pytest.approx(0.29625, abs=1e-12)
    assert rows['N4']['rw'] == pytest.approx(0.56, abs=1e-12)
    assert rows['N6']['spc'] == pytest.approx(rows['N3']['spc'], abs=1e-12)
    assert rows['N6']['rank'] == 1


def test_inconsistent_printed_rf_is_noted(report):
    assert len(report['notes']) == 1
    assert report['notes'][0].startswith('N3:')


def test_nodes_missing_from_reference_table(reference_nodes):
    printed = {'N6': {'spc': '.651', 'rw': '.56', 'rf': '.605'}}
    report = TableReplication(nodes=reference_nodes, printed=printed).run()
    assert report['flags'] == []
    assert report['notes'] == []
    assert sum(1 for row in report['rows'] if row['printed'] is None) == 6

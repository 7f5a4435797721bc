import itertools

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import config
from models import FeedbackVector, SecurityProfile, WeightTable
from services.scoring import (
    aggregate_feedback,
    compute_rf,
    compute_rw,
    compute_spc,
    compute_weighted_spc,
    rank_nodes,
    select_node,
)

scores = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
weights = st.floats(min_value=0.01, max_value=1.0, allow_nan=False)
profiles = st.lists(scores, min_size=7, max_size=7).map(lambda values: SecurityProfile(*values))
attribute_names = st.lists(st.sampled_from(config.FEEDBACK_ATTRIBUTES), min_size=1, unique=True)


@st.composite
def feedback_vectors(draw, names=None):
    names = names or draw(attribute_names)
    return FeedbackVector(tuple((name, draw(scores)) for name in names))


@settings(max_examples=1000, deadline=None)
@given(profile=profiles)
def test_spc_bounded_by_its_factors(profile):
    values = [value for _, value in profile.factors()]
    spc = compute_spc(profile)
    assert 0.0 <= spc <= 1.0
    assert min(values) - 1e-12 <= spc <= max(values) + 1e-12


@settings(max_examples=1000, deadline=None)
@given(profile=profiles, table=st.lists(weights, min_size=7, max_size=7))
def test_weighted_spc_bounded_by_its_factors(profile, table):
    values = [value for _, value in profile.factors()]
    spc = compute_weighted_spc(profile, WeightTable.from_mapping(dict(zip(config.SECURITY_FACTORS, table))))
    assert 0.0 <= spc <= 1.0
    assert min(values) - 1e-12 <= spc <= max(values) + 1e-12


@settings(max_examples=1000, deadline=None)
@given(profile=profiles, value=weights)
def test_uniform_weights_match_plain_mean(profile, value):
    assert compute_weighted_spc(profile, WeightTable.uniform(value)) == pytest.approx(compute_spc(profile), abs=1e-12)


@settings(max_examples=1000, deadline=None)
@given(profile=profiles, code=st.sampled_from(config.SECURITY_FACTORS), bump=st.floats(min_value=0.0, max_value=1.0))
def test_raising_a_factor_never_lowers_spc(profile, code, bump):
    raised = profile.replace_factor(code, min(1.0, profile.as_dict()[code] + bump))
    assert compute_spc(raised) >= compute_spc(profile)
    assert compute_weighted_spc(raised, WeightTable()) >= compute_weighted_spc(profile, WeightTable())


@settings(max_examples=1000, deadline=None)
@given(vector=feedback_vectors(), seed=st.randoms())
def test_rw_is_permutation_invariant_and_bounded(vector, seed):
    shuffled = list(vector.scores)
    seed.shuffle(shuffled)
    rw = compute_rw(vector)
    assert compute_rw(FeedbackVector(tuple(shuffled))) == rw
    assert min(vector.values) - 1e-12 <= rw <= max(vector.values) + 1e-12


@settings(max_examples=1000, deadline=None)
@given(data=st.data())
def test_aggregate_is_per_attribute_mean(data):
    names = data.draw(attribute_names)
    vectors = data.draw(st.lists(feedback_vectors(names=names), min_size=1, max_size=6))
    aggregated = aggregate_feedback(vectors)
    assert aggregated.names == tuple(names)
    for name in names:
        column = [vector.get(name) for vector in vectors]
        assert min(column) - 1e-12 <= aggregated.get(name) <= max(column) + 1e-12
    assert aggregate_feedback(list(reversed(vectors))) == aggregated


@settings(max_examples=1000, deadline=None)
@given(spc=scores, rw=scores)
def test_rf_is_the_midpoint(spc, rw):
    rf = compute_rf(spc, rw)
    assert min(spc, rw) <= rf <= max(spc, rw)
    assert rf == pytest.approx((spc + rw) / 2, abs=1e-12)


@settings(max_examples=1000, deadline=None)
@given(spc=scores, rw=scores, delta=st.floats(min_value=0.0, max_value=1.0))
def test_rf_monotone_in_both_inputs(spc, rw, delta):
    assert compute_rf(min(1.0, spc + delta), rw) >= compute_rf(spc, rw)
    assert compute_rf(spc, min(1.0, rw + delta)) >= compute_rf(spc, rw)


rated_nodes = st.dictionaries(
    st.text(alphabet='ABCDN0123456789', min_size=1, max_size=4),
    st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]) | scores,
    min_size=1,
    max_size=7,
)


@settings(max_examples=1000, deadline=None)
@given(nodes=rated_nodes, seed=st.randoms())
def test_ranking_is_a_deterministic_total_order(nodes, seed):
    items = list(nodes.items())
    expected = rank_nodes(items)
    seed.shuffle(items)
    ranked = rank_nodes(items)
    assert ranked == expected
    assert [entry.rank for entry in ranked] == list(range(1, len(nodes) + 1))
    for first, second in zip(ranked, ranked[1:]):
        assert first.rf > second.rf or (first.rf == second.rf and first.node_id < second.node_id)


@settings(max_examples=1000, deadline=None)
@given(nodes=rated_nodes)
def test_selection_matches_brute_force(nodes):
    assume(len(nodes) <= 5)
    best = None
    for order in itertools.permutations(nodes.items()):
        # 任意输入顺序下，首选都必须是RF最大且ID最小的节点
        selected = select_node(rank_nodes(order))
        best = best or selected
        assert selected == best
    top = max(nodes.values())
    assert best == min(node_id for node_id, rf in nodes.items() if rf == top)


def _rank_of(node_id, ranked):
    return next(entry.rank for entry in ranked if entry.node_id == node_id)


rated_profiles = st.dictionaries(
    st.text(alphabet='ABCDN0123456789', min_size=1, max_size=4),
    st.tuples(profiles, scores),
    min_size=1,
    max_size=7,
)


@settings(max_examples=1000, deadline=None)
@given(nodes=rated_profiles, data=st.data(), code=st.sampled_from(config.SECURITY_FACTORS),
       bump=st.floats(min_value=0.0, max_value=1.0))
def test_raising_a_factor_never_worsens_that_nodes_rank(nodes, data, code, bump):
    target = data.draw(st.sampled_from(sorted(nodes)))
    before = rank_nodes((node_id, compute_rf(compute_spc(profile), rw)) for node_id, (profile, rw) in nodes.items())

    profile, rw = nodes[target]
    raised = dict(nodes)
    raised[target] = (profile.replace_factor(code, min(1.0, profile.as_dict()[code] + bump)), rw)
    after = rank_nodes((node_id, compute_rf(compute_spc(profile), rw)) for node_id, (profile, rw) in raised.items())

    assert _rank_of(target, after) <= _rank_of(target, before)
    if _rank_of(target, before) == 1:
        assert select_node(after) == target

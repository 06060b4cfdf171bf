"""Randomised invariants over generated trees.

Everything here uses a fixed seed so failures reproduce; the parser
round-trip at the bottom uses hypothesis to explore text-level variation.
"""

import random

from hypothesis import given, strategies as st

from adtsched import (
    DagKind,
    FAILED,
    brute_force_min_agents,
    compute_time_unit,
    enumerate_defence_variants,
    expand_sand,
    min_schedule,
    normalize_time,
    parse_adt,
    preprocess_cases,
    apply_defence_config,
    reshuffle_slot,
    serialize_adt,
    validate_adt,
    verify_schedule,
)
from adtsched.preprocess import canonical_form, copy_dag, reachable

from rand_trees import random_adt, random_small_adt

SEED = 20260815


def forest(count, **kwargs):
    rng = random.Random(SEED)
    for _ in range(count):
        adt = random_adt(rng, **kwargs)
        assert validate_adt(adt) == []
        yield adt


def small_forest(count, **kwargs):
    rng = random.Random(SEED)
    for _ in range(count):
        adt = random_small_adt(rng, **kwargs)
        assert validate_adt(adt) == []
        yield adt


# ------------------------------------------------------------- preprocessing


def test_only_five_kinds_survive_preprocessing():
    allowed = {DagKind.SEQ, DagKind.NULL, DagKind.AND, DagKind.OR, DagKind.LEAF}
    for adt in forest(40, defence_prob=0.3):
        for case in preprocess_cases(adt):
            for variant in case.variants:
                assert {x.kind for x in variant.dag.nodes} <= allowed


def test_unit_steps_form_chains():
    for adt in forest(40, defence_prob=0.2):
        dag = expand_sand(normalize_time(adt))
        for node in dag.nodes:
            if node.kind is DagKind.SEQ:
                assert len(node.children) == 1
                assert len(node.parents) <= 1


def test_unit_steps_per_origin_match_the_durations():
    for adt in forest(40):
        tunit = compute_time_unit(adt)
        dag = expand_sand(normalize_time(adt))
        per_origin = {}
        for node in dag.nodes:
            if node.kind is DagKind.SEQ:
                per_origin[node.origin] = per_origin.get(node.origin, 0) + 1
        for label, node in adt.nodes.items():
            assert per_origin.get(label, 0) == node.duration // tunit


def test_feasible_variants_have_single_child_choices():
    for adt in forest(30, defence_prob=0.2):
        for case in preprocess_cases(adt):
            for variant in case.variants:
                if not variant.feasible:
                    continue
                for node in variant.dag.nodes:
                    if node.kind is DagKind.OR:
                        assert len(node.children) == 1


def test_every_variant_node_is_reachable():
    for adt in forest(30, defence_prob=0.3):
        for case in preprocess_cases(adt):
            for variant in case.variants:
                if variant.dag.root is not None:
                    assert reachable(variant.dag) == set(variant.dag.nodes)


def test_failed_defences_never_remove_attack_work():
    for adt in forest(40, defence_prob=0.5, allow_nodef=False):
        configs = enumerate_defence_variants(adt)
        if not configs:
            continue
        all_failed = {k: FAILED for k in configs[0]}
        dag = apply_defence_config(
            expand_sand(normalize_time(adt)), all_failed, adt)
        attack = {l for l, n in adt.nodes.items() if n.role.value == "attack"}
        assert attack <= {x.origin for x in dag.nodes}


def test_no_duplicate_variants_within_a_case():
    for adt in forest(40, defence_prob=0.4):
        fingerprints = set()
        for case in preprocess_cases(adt):
            digests = [canonical_form(v.dag) for v in case.variants]
            assert len(digests) == len(set(digests))
            frozen = frozenset(digests)
            assert frozen not in fingerprints
            fingerprints.add(frozen)


# ----------------------------------------------------------------- labelling


def depth_by_rule(node):
    if not node.children:
        return 0
    child_depths = [c.depth for c in node.children]
    if node.kind is DagKind.SEQ:
        return 1 + child_depths[0]
    if node.kind is DagKind.OR:
        return min(child_depths)
    return max(child_depths)


def test_depth_and_level_recurrences():
    for adt in forest(30, defence_prob=0.2):
        for case in preprocess_cases(adt):
            results = min_schedule(case.variants)
            for r in results:
                if not r.feasible or r.n == 0:
                    continue
                dag = r.variant.dag
                for node in dag.nodes:
                    assert node.depth == depth_by_rule(node)
                    if node is dag.root:
                        assert node.level == 0
                    else:
                        assert node.level == max(
                            p.level + (1 if p.kind is DagKind.SEQ else 0)
                            for p in node.parents)


def test_level_plus_depth_bounded_by_makespan():
    for adt in forest(30):
        for case in preprocess_cases(adt):
            for r in min_schedule(case.variants):
                if not r.feasible or r.n == 0:
                    continue
                root_depth = r.variant.dag.root.depth
                assert r.slots == root_depth  # minimal makespan, always
                tight = 0
                for node in r.variant.dag.nodes:
                    assert node.level + node.depth <= root_depth
                    if not node.children and node.level == root_depth:
                        tight += 1
                assert tight >= 1  # the critical path is realised


# ---------------------------------------------------------------- schedules


def test_every_schedule_verifies_clean():
    for adt in forest(40, defence_prob=0.3):
        for case in preprocess_cases(adt):
            for r in min_schedule(case.variants):
                if r.feasible and r.n:
                    assert verify_schedule(r.variant.dag) == []


def test_agents_are_contiguous_from_one():
    for adt in forest(30):
        for r in min_schedule(preprocess_cases(adt)[0].variants):
            if not r.feasible or r.n == 0:
                continue
            agents = {x.agent for x in r.variant.dag.nodes
                      if x.kind is DagKind.SEQ}
            assert agents == set(range(1, r.agents + 1))


def test_reshuffle_preserves_slots_and_load():
    rng = random.Random(SEED)
    for adt in small_forest(25):
        r = min_schedule(preprocess_cases(adt)[0].variants)[0]
        if not r.feasible or r.n == 0:
            continue
        dag = r.variant.dag
        slot = rng.randint(1, r.slots)
        before_slots = {x.name: x.slot for x in dag.nodes}
        before_load = {}
        for x in dag.nodes:
            if x.kind is DagKind.SEQ:
                before_load[x.slot] = before_load.get(x.slot, 0) + 1
        reshuffle_slot(dag, slot, r.agents)
        assert {x.name: x.slot for x in dag.nodes} == before_slots
        after_load = {}
        for x in dag.nodes:
            if x.kind is DagKind.SEQ:
                after_load[x.slot] = after_load.get(x.slot, 0) + 1
        assert after_load == before_load
        assert verify_schedule(dag) == []


def test_zero_duration_nodes_share_a_neighbouring_cell():
    for adt in forest(30, defence_prob=0.2):
        for case in preprocess_cases(adt):
            for r in min_schedule(case.variants):
                if not r.feasible or r.n == 0:
                    continue
                for node in r.variant.dag.nodes:
                    if node.kind is DagKind.SEQ:
                        continue
                    cell = (node.agent, node.slot)
                    near = {(x.agent, x.slot) for x in node.children}
                    near |= {(x.agent, x.slot) for x in node.parents}
                    assert cell in near


def test_exhaustive_oracle_agrees():
    for adt in small_forest(60, defence_prob=0.25):
        for case in preprocess_cases(adt):
            for r in min_schedule(case.variants):
                if not r.feasible or r.n == 0:
                    continue
                assert brute_force_min_agents(copy_dag(r.variant.dag)) == r.agents


# -------------------------------------------------------------- round-trip


@st.composite
def tree_texts(draw):
    count = draw(st.integers(min_value=1, max_value=9))
    kinds = ("AND", "OR", "SAND")
    lines = []
    children_of = {}
    for i in range(1, count):
        children_of.setdefault(draw(st.integers(0, i - 1)), []).append(i)
    total = 0
    for i in range(count):
        time = draw(st.integers(0, 4))
        total += time
        attrs = " time=%d" % time if time else ""
        if draw(st.booleans()):
            attrs += " cost=%d" % draw(st.integers(1, 99))
        kids = children_of.get(i)
        if kids:
            kind = draw(st.sampled_from(kinds))
            sep = ", " if draw(st.booleans()) else ","
            lines.append("n%d: %s(%s)%s" % (i, kind,
                                            sep.join("n%d" % k for k in kids),
                                            attrs))
        else:
            lines.append("n%d: ATTACK%s" % (i, attrs))
    if total == 0:
        lines[-1] += " time=1"
    if draw(st.booleans()):
        lines.insert(0, "# generated")
    if draw(st.booleans()):
        lines.insert(0, "root: n0")
    return "\n".join(lines) + "\n"


@given(tree_texts())
def test_round_trip_is_structurally_identical(text):
    adt = parse_adt(text)
    assert validate_adt(adt) == []
    again = parse_adt(serialize_adt(adt))
    assert again.root == adt.root
    assert set(again.nodes) == set(adt.nodes)
    for label, node in adt.nodes.items():
        twin = again.node(label)
        assert (twin.kind, twin.children, twin.duration, twin.cost) \
            == (node.kind, node.children, node.duration, node.cost)

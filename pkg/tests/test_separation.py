import itertools
import random
from fractions import Fraction

import pytest

from duploss.ilp import FractionalPoint, build_base_model
from duploss.instance import (
    SIDE_A,
    SIDE_B,
    Interval,
    instance_from_strings,
)
from duploss.oracle import enumerate_valid_labelings
from duploss.separation import (
    DUP_ISLAND,
    LIFTED_CYCLE,
    MAX_CLIQUE,
    PLAIN_CYCLE,
    FlowNetwork,
    SeparationContext,
    _island_cut_row,
    dups_incompatible,
    edge_dup_incompatible,
    enumerate_violated_cycles,
    max_flow_min_cut,
    max_weight_maximal_clique,
    separate_dup_island,
    separate_lifted_cycle,
    separate_max_clique,
)
from duploss.instance import edges_incompatible


def point_of(model, **groups):
    """Point from {edge (i,j): v}, {dup key: v}, {loss key: v} shorthand."""
    inst = model.instance
    values = {}
    for (i, j), v in groups.get("x", {}).items():
        values[model.match_var(inst.edge_lookup[(i, j)])] = v
    for key, v in groups.get("y", {}).items():
        values[model.dup_var(inst.dup_lookup[key])] = v
    for key, v in groups.get("z", {}).items():
        values[model.loss_var(inst.loss_lookup[key])] = v
    return FractionalPoint.from_dict(model, values)


def dup_key(side, o1, o2, t1, t2):
    return (side, Interval(o1, o2), Interval(t1, t2))


class TestMaxWeightClique:
    def test_two_stacked_edges(self):
        inst = instance_from_strings("a a", "a")
        model = build_base_model(inst)
        point = point_of(model, x={(1, 1): 0.6, (2, 1): 0.6})
        clique, weight = max_weight_maximal_clique(inst, point, 1, 2, 1, 1)
        assert weight == pytest.approx(1.2)
        assert sorted((e.i, e.j) for e in clique) == [(1, 1), (2, 1)]

    def test_empty_window(self):
        inst = instance_from_strings("a b", "b a")
        model = build_base_model(inst)
        point = point_of(model)
        # window rows {1} x cols {1}: symbol 'a' vs 'b', no edge
        clique, weight = max_weight_maximal_clique(inst, point, 1, 1, 1, 1)
        assert weight == 0.0
        assert clique == []

    def test_integral_noncrossing_weight_at_most_one(self):
        rng = random.Random(17)
        for _ in range(20):
            ta = " ".join(rng.choice("ab") for _ in range(rng.randint(1, 5)))
            tb = " ".join(rng.choice("ab") for _ in range(rng.randint(1, 5)))
            inst = instance_from_strings(ta, tb)
            model = build_base_model(inst)
            for lab in enumerate_valid_labelings(inst):
                point = model.labeling_to_point(lab)
                for l_b in range(1, inst.n + 1):
                    for l_e in range(l_b, inst.n + 1):
                        _, weight = max_weight_maximal_clique(
                            inst, point, l_b, l_e, 1, inst.m
                        )
                        assert weight <= 1.0 + 1e-9
                break  # one labeling per instance keeps this quick

    def test_clique_is_pairwise_incompatible_and_window_maximal(self):
        inst = instance_from_strings("a a b", "a b a")
        model = build_base_model(inst)
        rng = random.Random(3)
        point = FractionalPoint(
            model, [rng.random() for _ in model.variables]
        )
        clique, _ = max_weight_maximal_clique(inst, point, 1, 3, 1, 3)
        for e1, e2 in itertools.combinations(clique, 2):
            assert edges_incompatible(e1, e2)
        for cand in inst.edges:
            if cand in clique:
                continue
            assert not all(edges_incompatible(cand, e) for e in clique)


class TestSeparateMaxClique:
    def test_stacked_edges_cut(self):
        inst = instance_from_strings("a a", "a")
        model = build_base_model(inst)
        point = point_of(model, x={(1, 1): 0.6, (2, 1): 0.6})
        cuts = separate_max_clique(inst, point)
        assert len(cuts) == 1
        cut = cuts[0]
        assert cut.cut_class == MAX_CLIQUE
        assert cut.violation == pytest.approx(0.2)
        names = {
            (model.instance.edges[v.index].i, model.instance.edges[v.index].j)
            for v, _ in cut.row.coeffs
            if v.kind == "match"
        }
        assert names == {(1, 1), (2, 1)}

    def test_no_cuts_on_valid_labelings(self):
        rng = random.Random(23)
        for _ in range(10):
            ta = " ".join(rng.choice("ab") for _ in range(rng.randint(1, 4)))
            tb = " ".join(rng.choice("ab") for _ in range(rng.randint(1, 4)))
            inst = instance_from_strings(ta, tb)
            model = build_base_model(inst)
            for lab in enumerate_valid_labelings(inst):
                point = model.labeling_to_point(lab)
                assert separate_max_clique(inst, point) == []

    def test_pure_duplication_window_cut(self):
        inst = instance_from_strings("a b c a b c", "z")
        model = build_base_model(inst)
        d1 = dup_key(SIDE_A, 5, 6, 2, 3)
        d2 = dup_key(SIDE_A, 4, 6, 1, 3)
        point = point_of(model, y={d1: 0.7, d2: 0.7})
        cuts = separate_max_clique(inst, point)
        assert cuts
        cut = cuts[0]
        assert cut.violation == pytest.approx(0.4)
        dup_vars = {
            model.dup_var(inst.dup_lookup[d1]),
            model.dup_var(inst.dup_lookup[d2]),
        }
        members = {v for v, _ in cut.row.coeffs}
        assert dup_vars <= members
        assert cut.row.rhs == 1

    def test_emitted_cliques_maximal(self):
        inst = instance_from_strings("a a b", "a b")
        model = build_base_model(inst)
        point = point_of(model, x={(1, 1): 0.55, (2, 1): 0.55, (3, 2): 0.2})
        for cut in separate_max_clique(inst, point):
            edges = [
                inst.edges[v.index] for v, _ in cut.row.coeffs if v.kind == "match"
            ]
            dups = [inst.dups[v.index] for v, _ in cut.row.coeffs if v.kind == "dup"]
            # pairwise incompatibility
            for e1, e2 in itertools.combinations(edges, 2):
                assert edges_incompatible(e1, e2)
            for e in edges:
                for d in dups:
                    assert edge_dup_incompatible(e, d)
            for d1, d2 in itertools.combinations(dups, 2):
                assert dups_incompatible(d1, d2)
            # maximality: nothing else conflicts with every member
            for cand in inst.edges:
                if cand in edges:
                    continue
                assert not (
                    all(edges_incompatible(cand, e) for e in edges if e != cand)
                    and all(edge_dup_incompatible(cand, d) for d in dups)
                )
            for cand in inst.dups:
                if cand in dups:
                    continue
                assert not (
                    all(edge_dup_incompatible(e, cand) for e in edges)
                    and all(dups_incompatible(cand, d) for d in dups if d != cand)
                )


class TestMaxFlow:
    def test_single_arc(self):
        net = FlowNetwork(2)
        net.add_arc(0, 1, 3)
        value, sink_side = max_flow_min_cut(net, 0, 1)
        assert value == pytest.approx(3.0)
        assert sink_side == frozenset({1})

    def test_diamond(self):
        net = FlowNetwork(4)
        net.add_arc(0, 1, 1)
        net.add_arc(0, 2, 1)
        net.add_arc(1, 3, 1)
        net.add_arc(2, 3, 1)
        value, _ = max_flow_min_cut(net, 0, 3)
        assert value == pytest.approx(2.0)

    def test_random_networks_vs_bruteforce(self):
        rng = random.Random(31)
        for _ in range(25):
            n = 8
            net = FlowNetwork(n)
            for u in range(n):
                for v in range(n):
                    if u != v and rng.random() < 0.35:
                        net.add_arc(u, v, rng.randint(1, 5))
            s, t = 0, n - 1
            value, sink_side = max_flow_min_cut(net, s, t)
            best = float("inf")
            middle = [v for v in range(n) if v not in (s, t)]
            for r in range(len(middle) + 1):
                for group in itertools.combinations(middle, r):
                    sink = set(group) | {t}
                    cut = sum(
                        cap
                        for (u, v), cap in net.capacity.items()
                        if u not in sink and v in sink
                    )
                    best = min(best, cut)
            assert value == pytest.approx(best, abs=1e-9)
            assert t in sink_side and s not in sink_side
            cut_weight = sum(
                cap
                for (u, v), cap in net.capacity.items()
                if u not in sink_side and v in sink_side
            )
            assert cut_weight == pytest.approx(value, abs=1e-9)

    def test_early_stop(self):
        net = FlowNetwork(2)
        net.add_arc(0, 1, 5)
        value, sink_side = max_flow_min_cut(net, 0, 1, stop_at=1.0)
        assert value >= 1.0
        assert sink_side is None


class TestSeparateDupIsland:
    def test_integral_two_cycle_island(self):
        inst = instance_from_strings("a b a b", "a b")
        model = build_base_model(inst)
        point = point_of(
            model,
            y={dup_key(SIDE_A, 1, 2, 3, 4): 1.0, dup_key(SIDE_A, 3, 4, 1, 2): 1.0},
            z={(SIDE_B, 1): 1.0, (SIDE_B, 2): 1.0},
        )
        cuts = separate_dup_island(inst, point)
        assert cuts
        assert cuts[0].cut_class == DUP_ISLAND
        assert cuts[0].violation == pytest.approx(1.0)

    def test_no_cuts_on_valid_labelings(self):
        rng = random.Random(29)
        for _ in range(8):
            ta = " ".join(rng.choice("ab") for _ in range(rng.randint(1, 4)))
            tb = " ".join(rng.choice("ab") for _ in range(rng.randint(1, 4)))
            inst = instance_from_strings(ta, tb)
            model = build_base_model(inst)
            for lab in enumerate_valid_labelings(inst):
                point = model.labeling_to_point(lab)
                assert separate_dup_island(inst, point) == []

    def test_saturated_losses_no_cuts(self):
        inst = instance_from_strings("a b a b", "a b")
        model = build_base_model(inst)
        point = point_of(
            model,
            z={(SIDE_A, p): 1.0 for p in range(1, 5)}
            | {(SIDE_B, p): 1.0 for p in range(1, 3)},
        )
        assert separate_dup_island(inst, point) == []

    def test_island_lhs_identity(self):
        # the island row's value equals the weight of the corresponding cut
        # in the auxiliary network, for random subsets and random points
        rng = random.Random(37)
        inst = instance_from_strings("a b a b a", "a b")
        model = build_base_model(inst)
        ctx = SeparationContext(inst)
        view = ctx.views[SIDE_A]
        for _ in range(30):
            point = FractionalPoint(
                model, [rng.random() * 0.7 for _ in model.variables]
            )
            subset = frozenset(
                p for p in range(2, inst.n + 1) if rng.random() < 0.5
            )
            if not subset:
                continue
            row = _island_cut_row(inst, view, model, subset)
            lhs = row.evaluate(point.value)

            x_vals = point.match_values()
            z_vals = point.loss_values()
            y_vals = point.dup_values()
            mass = view.cover_mass(x_vals, z_vals)
            y_side = view.dup_values(y_vals)
            source_part = sum(mass[v] for v in subset)  # anchor node 1 not in subset
            arc_part = 0.0
            for (u, v), locals_ in view.aligned.items():
                if u not in subset and v in subset:
                    arc_part += sum(y_side[k] for k in locals_)
            assert lhs == pytest.approx(source_part + arc_part, abs=1e-9)


class TestSeparateLiftedCycle:
    def test_mutual_pair_cut(self):
        inst = instance_from_strings("a b a b", "a b")
        model = build_base_model(inst)
        d1 = dup_key(SIDE_A, 1, 2, 3, 4)
        d2 = dup_key(SIDE_A, 3, 4, 1, 2)
        point = point_of(model, y={d1: 0.6, d2: 0.6})
        cuts = separate_lifted_cycle(inst, point)
        assert cuts
        for cut in cuts:
            assert cut.cut_class == LIFTED_CYCLE
            # the mutual pair drives every violated cycle: violation 0.2,
            # both duplications with unit coefficient, right-hand side 1
            assert cut.violation == pytest.approx(0.2)
            coeffs = dict(cut.row.coeffs)
            assert coeffs[model.dup_var(inst.dup_lookup[d1])] == 1
            assert coeffs[model.dup_var(inst.dup_lookup[d2])] == 1
            assert cut.row.rhs == 1
            # any extra group members carry zero value at this point
            extras = [
                v for v, _ in cut.row.coeffs
                if v not in (model.dup_var(inst.dup_lookup[d1]),
                             model.dup_var(inst.dup_lookup[d2]))
            ]
            assert all(point.value(v) == 0.0 for v in extras)

    def test_boundary_weight_no_cut(self):
        inst = instance_from_strings("a b a b", "a b")
        model = build_base_model(inst)
        point = point_of(
            model,
            y={dup_key(SIDE_A, 1, 2, 3, 4): 0.5, dup_key(SIDE_A, 3, 4, 1, 2): 0.5},
        )
        assert separate_lifted_cycle(inst, point) == []

    def test_acyclic_support_no_cut(self):
        inst = instance_from_strings("a b a b", "a b")
        model = build_base_model(inst)
        point = point_of(
            model,
            y={dup_key(SIDE_A, 1, 2, 3, 4): 0.9, dup_key(SIDE_A, 1, 1, 3, 3): 0.9},
        )
        assert separate_lifted_cycle(inst, point) == []

    def test_no_cuts_on_valid_labelings(self):
        rng = random.Random(41)
        for _ in range(8):
            ta = " ".join(rng.choice("ab") for _ in range(rng.randint(1, 4)))
            tb = " ".join(rng.choice("ab") for _ in range(rng.randint(1, 4)))
            inst = instance_from_strings(ta, tb)
            model = build_base_model(inst)
            for lab in enumerate_valid_labelings(inst):
                point = model.labeling_to_point(lab)
                assert separate_lifted_cycle(inst, point) == []


class TestEnumerateViolatedCycles:
    def test_integral_mutual_pair(self):
        inst = instance_from_strings("a b a b", "a b")
        model = build_base_model(inst)
        point = point_of(
            model,
            y={dup_key(SIDE_A, 1, 2, 3, 4): 1.0, dup_key(SIDE_A, 3, 4, 1, 2): 1.0},
        )
        cuts, truncated = enumerate_violated_cycles(inst, point)
        assert not truncated
        assert len(cuts) == 1
        assert cuts[0].cut_class == PLAIN_CYCLE
        assert cuts[0].row.rhs == 1
        assert cuts[0].violation == pytest.approx(1.0)

    def test_one_sided_value_no_cycle(self):
        inst = instance_from_strings("a b a b", "a b")
        model = build_base_model(inst)
        point = point_of(model, y={dup_key(SIDE_A, 1, 2, 3, 4): 1.0})
        cuts, truncated = enumerate_violated_cycles(inst, point)
        assert cuts == [] and not truncated

    def test_fractional_three_cycle(self):
        # chain of three blocks: each duplication's origin overlaps the
        # previous target; weight 3 * 0.1 = 0.3 < 1
        inst = instance_from_strings("a b a b a b a b", "z")
        model = build_base_model(inst)
        d1 = dup_key(SIDE_A, 1, 2, 3, 4)
        d2 = dup_key(SIDE_A, 4, 5, 6, 7)
        d3 = dup_key(SIDE_A, 7, 8, 1, 2)
        assert all(key in inst.dup_lookup for key in (d1, d2, d3))
        point = point_of(model, y={d1: 0.9, d2: 0.9, d3: 0.9})
        cuts, truncated = enumerate_violated_cycles(inst, point)
        assert not truncated
        three = [c for c in cuts if len(c.row.coeffs) == 3]
        assert len(three) == 1
        # lhs 2.7 against rhs 2: violated by 0.7 (equals one minus the
        # cycle weight 0.3)
        assert three[0].violation == pytest.approx(0.7)
        assert three[0].row.rhs == 2

    def test_matches_cycle_predicate_on_integral_points(self):
        from duploss.instance import has_duplication_cycle

        rng = random.Random(43)
        for _ in range(10):
            ta = " ".join(rng.choice("ab") for _ in range(rng.randint(2, 5)))
            inst = instance_from_strings(ta, "z")
            model = build_base_model(inst)
            if not inst.dups:
                continue
            chosen = [d for d in inst.dups if rng.random() < 0.4]
            point = point_of(
                model, y={(d.side, d.origin, d.target): 1.0 for d in chosen}
            )
            cuts, _ = enumerate_violated_cycles(inst, point)
            assert bool(cuts) == has_duplication_cycle(chosen)


class TestCutValidity:
    """Master property: no emitted cut excludes any valid labeling."""

    def test_all_classes_on_random_points(self):
        rng = random.Random(47)
        for _ in range(12):
            ta = " ".join(rng.choice("ab") for _ in range(rng.randint(2, 5)))
            tb = " ".join(rng.choice("ab") for _ in range(rng.randint(1, 4)))
            inst = instance_from_strings(ta, tb)
            model = build_base_model(inst)
            images = []
            for lab in enumerate_valid_labelings(inst):
                p01 = model.labeling_to_point(lab)
                images.append({v: round(x) for v, x in p01.items()})
                if len(images) >= 200:
                    break
            for _ in range(3):
                point = FractionalPoint(
                    model, [rng.random() for _ in model.variables]
                )
                cuts = (
                    separate_max_clique(inst, point)
                    + separate_dup_island(inst, point)
                    + separate_lifted_cycle(inst, point)
                    + enumerate_violated_cycles(inst, point)[0]
                )
                for cut in cuts:
                    for image in images:
                        assert cut.row.satisfied_exact(image.__getitem__), (
                            cut.cut_class,
                            cut.row,
                        )

    def test_violation_matches_row_reevaluation(self):
        rng = random.Random(53)
        inst = instance_from_strings("a b a b", "a b")
        model = build_base_model(inst)
        for _ in range(5):
            point = FractionalPoint(model, [rng.random() for _ in model.variables])
            cuts = (
                separate_max_clique(inst, point)
                + separate_dup_island(inst, point)
                + separate_lifted_cycle(inst, point)
                + enumerate_violated_cycles(inst, point)[0]
            )
            for cut in cuts:
                assert cut.violation == pytest.approx(
                    cut.row.violation(point.value), abs=1e-9
                )
                assert cut.violation > 0

    def test_cut_json_roundtrip(self):
        inst = instance_from_strings("a a", "a")
        model = build_base_model(inst)
        point = point_of(model, x={(1, 1): 0.6, (2, 1): 0.6})
        cut = separate_max_clique(inst, point)[0]
        payload = cut.to_json()
        assert payload["class"] == MAX_CLIQUE
        assert payload["row"]["sense"] == "<="
        assert payload["witness"]["window"] == [1, 2]

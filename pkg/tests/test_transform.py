import math

import pytest

from pedloops import (
    GeneratorParams,
    StructureError,
    apply_break,
    break_loops,
    check_loops,
    complexity_report,
    loop_count,
    parse_pedigree,
    plan_breaks,
    random_pedigree,
    serialize_pedigree,
)
from pedloops.model import genotype_log_weights, same_structure

LN2 = math.log(2)


def test_apply_break_redirects_children(load):
    p = load("double_loop")
    q, record = apply_break(p, 4, 2)
    assert (record.clone_id, record.original_id, record.mating_id) == (10, 4, 2)
    clone = q.by_id(10)
    assert clone.sex == "F" and clone.is_founder and not clone.is_proband
    assert clone.clone_of == 4
    assert q.by_id(6).mother_id == 10
    assert q.by_id(7).mother_id == 10
    # the original stays put in its other matings
    assert q.by_id(8).mother_id == 4
    assert loop_count(q) == loop_count(p) - 1


def test_apply_break_requires_a_parent(load):
    with pytest.raises(StructureError, match="not a parent"):
        apply_break(load("double_loop"), 9, 2)


def test_apply_break_rejects_taken_clone_id(load):
    with pytest.raises(StructureError, match="taken"):
        apply_break(load("double_loop"), 4, 2, clone_id=5)


def test_apply_break_twice_on_the_same_original(load):
    p = load("double_loop")
    q, _ = apply_break(p, 4, 2)
    r, record = apply_break(q, 4, 3)
    assert record.clone_id == 11
    assert r.by_id(11).clone_of == 4
    assert r.by_id(8).mother_id == 11
    assert not check_loops(r)


def test_clone_of_a_clone_points_at_the_root(load):
    p = load("double_loop")
    q, _ = apply_break(p, 4, 2)  # mating 2 mother is now clone 10
    r, record = apply_break(q, 10, 2)
    assert record.original_id == 10
    assert r.by_id(record.clone_id).clone_of == 4


def test_apply_break_keeps_mating_ids_stable(load):
    p = load("t13")
    q, first = apply_break(p, 1, 1)
    assert [(m.mating_id, sorted(m.child_ids)) for m in q.matings] == \
        [(m.mating_id, sorted(m.child_ids)) for m in p.matings]
    r, second = apply_break(q, 2, 1)
    assert (first.mating_id, second.mating_id) == (1, 1)
    assert not check_loops(r)


def test_break_loops_reproduces_expected_rows(load, read_text):
    p = load("double_loop")
    broken, records, report = break_loops(p)
    assert serialize_pedigree(broken) == read_text("double_loop_expected")
    assert [(r.clone_id, r.original_id, r.mating_id) for r in records] == \
        [(10, 4, 2), (11, 4, 3)]
    assert report["loops_initial"] == 2
    assert report["clones_created"] == 2
    assert report["method_trace"] == ["greedy"]
    assert [s["method"] for s in report["steps"]] == ["greedy", "greedy"]
    assert report["report_version"] == 1
    assert report["elapsed_seconds"] >= 0.0


def test_break_loops_passthrough_when_loop_free(load):
    p = load("loopfree")
    broken, records, report = break_loops(p)
    assert broken is p
    assert records == []
    assert report["loops_initial"] == 0
    assert report["complexity"]["factor"] == 1


def test_break_loops_mixed_strategies(load, read_text):
    p = load("t12")
    broken, records, report = break_loops(p)
    assert serialize_pedigree(broken) == read_text("t12_expected")
    assert report["method_trace"] == ["greedy", "mst"]
    assert report["complexity"]["factor"] == 8
    assert math.isclose(report["complexity"]["total_log"], 3 * LN2)
    assert report["complexity"]["notes"] == ["individual 4 was duplicated 2 times"]


def test_break_loops_flags_founders_inside_loops(load):
    _, _, report = break_loops(load("t08"))
    assert any("founder" in w and "1" in w for w in report["warnings"])


def test_break_loops_flags_placeholder_breakers():
    # same half-sib loop, with the doubly married founder marked synthetic
    text = ("ID,MotherID,FatherID,Sex,isProband,IsPlaceholder\n"
            "1,,,M,0,1\n"
            "2,,,F,0,0\n"
            "3,2,1,M,0,0\n"
            "4,,,F,0,0\n"
            "5,4,1,F,0,0\n"
            "6,5,3,M,1,0\n")
    p = parse_pedigree(text)
    broken, records, report = break_loops(p)
    assert records[0].original_id == 1
    assert any("placeholder" in w for w in report["warnings"])
    assert broken.by_id(records[0].clone_id).is_placeholder


def test_complexity_report_values(load):
    p = load("double_loop")
    weights = genotype_log_weights(p)
    _, records, _ = break_loops(p)
    cx = complexity_report(records, weights)
    assert cx["factor"] == 4
    assert math.isclose(cx["total_log"], 2 * LN2)
    assert [row["clone"] for row in cx["per_clone"]] == [10, 11]
    assert cx["notes"] == ["individual 4 was duplicated 2 times"]


def test_complexity_keeps_non_integer_factors():
    cx = complexity_report([], {})
    assert cx["factor"] == 1 and cx["total_log"] == 0.0


def test_break_is_idempotent(load):
    p = load("t16")
    once, _, _ = break_loops(p)
    twice, records, _ = break_loops(once)
    assert twice is once and records == []


def test_variant_data_survives_breaking(load):
    p = load("tested_breaker")
    broken, records, _ = break_loops(p)
    assert broken.variant_names == ("V1",)
    clone = broken.by_id(records[0].clone_id)
    assert clone.test_results == {"V1": "carrier"}
    for ind in p:
        assert broken.by_id(ind.id).test_results == dict(ind.test_results)


def test_probands_survive_breaking():
    for seed in range(20):
        p = random_pedigree(GeneratorParams(
            individual_count=(6, 30), loop_count=1 + seed % 3,
            multiple_matings=bool(seed % 2), seed=600 + seed))
        broken, records, _ = break_loops(p)
        assert not check_loops(broken)
        assert len(records) == loop_count(p)
        assert {i.id for i in p.probands()} == {i.id for i in broken.probands()}
        # every original row survives; only parent pointers may move
        for ind in p:
            after = broken.by_id(ind.id)
            assert (ind.sex, ind.is_proband, dict(ind.test_results)) == \
                (after.sex, after.is_proband, dict(after.test_results))
        for r in records:
            clone = broken.by_id(r.clone_id)
            assert clone.is_founder and clone.clone_of is not None


def test_every_severance_opens_exactly_one_loop():
    for seed in range(12):
        p = random_pedigree(GeneratorParams(
            individual_count=(8, 28), loop_count=1 + seed % 3,
            multiple_matings=bool(seed % 2), seed=700 + seed))
        before = loop_count(p)
        plan = plan_breaks(p)
        current = p
        for i, step in enumerate(plan.steps, start=1):
            current, _ = apply_break(current, step.breaker_id, step.mating_id)
            assert loop_count(current) == before - i
        assert not check_loops(current)

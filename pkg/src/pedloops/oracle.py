"""Reference answers and synthetic inputs for exercising the pipeline.

brute_force_min_plan finds the true minimum severance cost by trying every
subset of parental links in the trimmed graph, so it only scales to small
loop clusters; it exists to judge the production strategies, not to
replace them. random_pedigree builds seeded random families with an exact,
known number of loops.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Mapping, Optional

from .graph import PARENT_LINK, PedigreeGraph, build_graph, has_cycle_dfs, trim_leaves
from .model import (
    CARRIER,
    FEMALE,
    MALE,
    NON_CARRIER,
    Individual,
    Pedigree,
    genotype_log_weights,
)

MAX_ORACLE_EDGES = 12


class OracleSizeError(ValueError):
    """The family's loop cluster is too large for exhaustive search."""


def brute_force_min_plan(p: Pedigree,
                         weights: Optional[Mapping[int, float]] = None) -> float:
    """Exact minimum total log weight over all severance sets.

    A severance set is any collection of parental links whose removal
    leaves the family graph loop-free; each removed link is charged its
    person's log weight. Child links never need removing because every
    loop passes through at least one parental link.
    """
    if weights is None:
        weights = genotype_log_weights(p)
    t = trim_leaves(build_graph(p))
    if t.n_vertices == 0:
        return 0.0
    parental = sorted(
        (e for e in t.edges if e.role == PARENT_LINK),
        key=lambda e: (e.person_id, e.mating_id))
    if len(parental) > MAX_ORACLE_EDGES:
        raise OracleSizeError(
            f"{len(parental)} parental links exceed the exhaustive "
            f"search limit of {MAX_ORACLE_EDGES}")
    best = math.inf
    for size in range(len(parental) + 1):
        for subset in itertools.combinations(parental, size):
            cost = math.fsum(weights[e.person_id] for e in subset)
            if cost >= best:
                continue
            remaining = t.edges - set(subset)
            if not has_cycle_dfs(PedigreeGraph(t.vertices, remaining)):
                best = cost
    return best


@dataclass(frozen=True)
class GeneratorParams:
    """Knobs for random_pedigree; same params always give the same family."""

    individual_count: tuple[int, int] = (10, 30)
    loop_count: int = 0
    multiple_matings: bool = False
    variant_count: int = 0
    tested_fraction: float = 0.0
    seed: int = 0


class _Builder:
    """Mutable scratch state while growing one random family."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.sex: dict[int, str] = {}
        self.mother: dict[int, Optional[int]] = {}
        self.father: dict[int, Optional[int]] = {}
        # (father, mother) -> child ids; doubles as the marriage registry
        self.matings: dict[tuple[int, int], list[int]] = {}
        self.next_id = 1

    def add_person(self, sex: str, mother: Optional[int] = None,
                   father: Optional[int] = None) -> int:
        pid = self.next_id
        self.next_id += 1
        self.sex[pid] = sex
        self.mother[pid] = mother
        self.father[pid] = father
        return pid

    def random_sex(self) -> str:
        return FEMALE if self.rng.random() < 0.5 else MALE

    def add_child(self, father: int, mother: int, sex: Optional[str] = None) -> int:
        child = self.add_person(sex or self.random_sex(), mother=mother, father=father)
        self.matings.setdefault((father, mother), []).append(child)
        return child

    def couple(self, a: int, b: int) -> tuple[int, int]:
        if self.sex[a] == MALE:
            return (a, b)
        return (b, a)

    def married(self, pid: int) -> bool:
        return any(pid in pair for pair in self.matings)

    def random_mating(self) -> tuple[int, int]:
        return self.rng.choice(sorted(self.matings))


def _validate(params: GeneratorParams) -> None:
    lo, hi = params.individual_count
    if not 1 <= lo <= hi:
        raise ValueError(f"bad individual count range ({lo}, {hi})")
    if params.loop_count < 0:
        raise ValueError("loop_count cannot be negative")
    if params.variant_count < 0:
        raise ValueError("variant_count cannot be negative")
    if not 0.0 <= params.tested_fraction <= 1.0:
        raise ValueError("tested_fraction must lie in [0, 1]")


def random_pedigree(params: GeneratorParams) -> Pedigree:
    """Seeded random connected family with exactly params.loop_count loops.

    The family grows from one founder couple by marrying in founders and
    adding children, both of which keep it loop-free; each loop is then
    created by one extra mating between two existing bloodline members,
    which raises the independent loop count by exactly one. With
    multiple_matings the extra mating pairs a child of a remarried parent
    with a half-sibling, forcing the several-matings selection case.
    """
    _validate(params)
    rng = random.Random(params.seed)
    lo, hi = params.individual_count
    minimum = 3 + 3 * params.loop_count if params.loop_count else 1
    if hi < minimum:
        raise ValueError(
            f"cannot fit {params.loop_count} loop(s) in at most {hi} individuals")
    target = max(rng.randint(lo, hi), minimum)
    if target == 2:
        if hi < 3:
            raise ValueError("two individuals cannot form a connected family")
        target = 3

    b = _Builder(rng)
    if target == 1:
        b.add_person(b.random_sex())
    else:
        father = b.add_person(MALE)
        mother = b.add_person(FEMALE)
        b.add_child(father, mother)

        budget = target - 3 - 3 * params.loop_count
        pair_ops = rng.randint(0, budget // 2)
        ops = (["marry"] * pair_ops
               + ["child"] * (budget - 2 * pair_ops)
               + ["loop"] * params.loop_count)
        rng.shuffle(ops)
        for op in ops:
            if op == "marry":
                _grow_marriage(b, allow_remarriage=params.multiple_matings)
            elif op == "child":
                b.add_child(*b.random_mating())
            elif params.multiple_matings:
                _inject_loop_multiple_matings(b)
            else:
                _inject_loop_monogamous(b)

    return _finish(b, params)


def _grow_marriage(b: _Builder, allow_remarriage: bool) -> None:
    pool = sorted(b.sex)
    if not allow_remarriage:
        pool = [pid for pid in pool if not b.married(pid)]
        # every growth op leaves at least one unmarried person behind
        assert pool, "no unmarried person available"
    partner = b.rng.choice(pool)
    spouse = b.add_person(FEMALE if b.sex[partner] == MALE else MALE)
    b.add_child(*b.couple(partner, spouse))


def _inject_loop_monogamous(b: _Builder) -> None:
    """Two fresh children of existing matings mate: one new loop, and
    everyone still has a single mating."""
    a = b.add_child(*b.random_mating(), sex=MALE)
    c = b.add_child(*b.random_mating(), sex=FEMALE)
    b.add_child(a, c)


def _inject_loop_multiple_matings(b: _Builder) -> None:
    """Remarry an existing parent, then mate the half-siblings: one new
    loop that keeps the remarried parent inside it."""
    pair = b.random_mating()
    c1 = b.rng.choice(sorted(b.matings[pair]))
    parent = b.rng.choice(pair)
    spouse = b.add_person(FEMALE if b.sex[parent] == MALE else MALE)
    c2 = b.add_child(*b.couple(parent, spouse),
                     sex=FEMALE if b.sex[c1] == MALE else MALE)
    b.add_child(*b.couple(c1, c2))


def _finish(b: _Builder, params: GeneratorParams) -> Pedigree:
    rng = b.rng
    variant_names = tuple(f"V{i}" for i in range(1, params.variant_count + 1))
    proband = rng.choice(sorted(b.sex))
    members = []
    for pid in sorted(b.sex):
        tests = {}
        for name in variant_names:
            if rng.random() < params.tested_fraction:
                tests[name] = CARRIER if rng.random() < 0.5 else NON_CARRIER
        members.append(Individual(
            id=pid, sex=b.sex[pid],
            mother_id=b.mother[pid], father_id=b.father[pid],
            is_proband=(pid == proband), test_results=tests))
    return Pedigree(members, variant_names)

"""Pedigree tables: parsing, validation, repair and the derived mating index.

A pedigree is a flat table of individuals linked by mother/father ids.
Everything downstream (graph construction, loop breaking) works off the
validated form built here, so this module is strict about referential
integrity while staying permissive about input tokens.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

logger = logging.getLogger(__name__)

FEMALE = "F"
MALE = "M"

CARRIER = "carrier"
NON_CARRIER = "non_carrier"

CORE_COLUMNS = ("ID", "MotherID", "FatherID", "Sex", "isProband")
CLONE_OF_COLUMN = "CloneOf"
PLACEHOLDER_COLUMN = "IsPlaceholder"
RESERVED_COLUMNS = frozenset(CORE_COLUMNS) | {CLONE_OF_COLUMN, PLACEHOLDER_COLUMN}

# Token tables for permissive input. Output always uses the first canonical
# form (F/M, 0/1, empty cell for missing or untested).
_MISSING = {"", "0", "na", "n/a"}
_SEXES = {
    "0": FEMALE, "f": FEMALE, "female": FEMALE,
    "1": MALE, "m": MALE, "male": MALE,
}
_TRUE = {"1", "true", "yes", "y"}
_FALSE = {"0", "false", "no", "n", ""}
_TEST_CARRIER = {"1", "carrier"}
_TEST_NON_CARRIER = {"0", "non_carrier", "noncarrier"}
_TEST_MISSING = {"", "na", "n/a"}


class PedigreeFormatError(ValueError):
    """Malformed or inconsistent input data."""

    def __init__(self, message: str, row: Optional[int] = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class NoProbandError(PedigreeFormatError):
    """No family in the input contains a proband."""


class StructureError(RuntimeError):
    """An internal contract was violated (wrong call order or corrupt state)."""


@dataclass(frozen=True)
class Individual:
    """One pedigree row.

    test_results maps a variant name to CARRIER or NON_CARRIER; a variant
    absent from the map is untested. clone_of marks individuals synthesized
    by loop breaking and always points at an original (never at another
    clone). Placeholders are synthesized parents for half-orphans.
    """

    id: int
    sex: str
    mother_id: Optional[int] = None
    father_id: Optional[int] = None
    is_proband: bool = False
    test_results: Mapping[str, str] = field(default_factory=dict)
    clone_of: Optional[int] = None
    is_placeholder: bool = False

    @property
    def is_founder(self) -> bool:
        return self.mother_id is None and self.father_id is None

    @property
    def has_both_parents(self) -> bool:
        return self.mother_id is not None and self.father_id is not None


@dataclass(frozen=True)
class Mating:
    """A (father, mother) pair with at least one child in the pedigree.

    Ids are assigned in ascending order of the smallest child id. Child
    sets never change under loop breaking (only parent identities do), so
    this numbering is stable across the whole transform.
    """

    mating_id: int
    father_id: int
    mother_id: int
    child_ids: tuple[int, ...]

    def parents(self) -> tuple[int, int]:
        return (self.father_id, self.mother_id)


class Pedigree:
    """Validated, effectively immutable set of individuals plus derived matings.

    Member order is preserved from construction (it matters for faithful
    serialization); all algorithmic iteration happens in id order. Treat
    instances as read-only; transforms build new ones.
    """

    def __init__(self, members: Iterable[Individual], variant_names: Sequence[str] = ()):
        self._members: dict[int, Individual] = {}
        for ind in members:
            if ind.id in self._members:
                raise PedigreeFormatError(f"duplicate individual id {ind.id}")
            self._members[ind.id] = ind
        self.variant_names: tuple[str, ...] = tuple(variant_names)
        _check_member_invariants(self._members)
        self.matings: tuple[Mating, ...] = derive_matings(self)
        self._matings_by_id = {m.mating_id: m for m in self.matings}

    def __len__(self) -> int:
        return len(self._members)

    def __contains__(self, individual_id: int) -> bool:
        return individual_id in self._members

    def __iter__(self):
        return iter(self._members.values())

    @property
    def members(self) -> tuple[Individual, ...]:
        return tuple(self._members.values())

    @property
    def ids(self) -> frozenset[int]:
        return frozenset(self._members)

    @property
    def max_id(self) -> int:
        return max(self._members) if self._members else 0

    def by_id(self, individual_id: int) -> Individual:
        try:
            return self._members[individual_id]
        except KeyError:
            raise KeyError(f"no individual with id {individual_id}") from None

    def mating_by_id(self, mating_id: int) -> Mating:
        try:
            return self._matings_by_id[mating_id]
        except KeyError:
            raise KeyError(f"no mating with id {mating_id}") from None

    @property
    def n_individuals(self) -> int:
        return len(self._members)

    @property
    def n_matings(self) -> int:
        return len(self.matings)

    @property
    def n_offspring(self) -> int:
        return sum(1 for ind in self if ind.has_both_parents)

    def founders(self) -> tuple[Individual, ...]:
        return tuple(ind for ind in self if ind.is_founder)

    def probands(self) -> tuple[Individual, ...]:
        return tuple(ind for ind in self if ind.is_proband)


def _check_member_invariants(members: Mapping[int, Individual]) -> None:
    for ind in members.values():
        if ind.id <= 0:
            raise PedigreeFormatError(f"individual id must be positive, got {ind.id}")
        if ind.sex not in (FEMALE, MALE):
            raise PedigreeFormatError(f"individual {ind.id}: bad sex value {ind.sex!r}")
        if ind.id in (ind.mother_id, ind.father_id):
            raise PedigreeFormatError(f"individual {ind.id} is listed as its own parent")
        for label, pid, want in (("mother", ind.mother_id, FEMALE), ("father", ind.father_id, MALE)):
            if pid is None:
                continue
            parent = members.get(pid)
            if parent is None:
                raise PedigreeFormatError(f"individual {ind.id}: {label} {pid} does not exist")
            if parent.sex != want:
                raise PedigreeFormatError(
                    f"individual {ind.id}: {label} {pid} is recorded with the wrong sex")
        if ind.clone_of is not None:
            original = members.get(ind.clone_of)
            if original is None:
                raise PedigreeFormatError(
                    f"individual {ind.id}: CloneOf {ind.clone_of} does not exist")
            if original.clone_of is not None:
                raise PedigreeFormatError(
                    f"individual {ind.id}: CloneOf must reference an original, "
                    f"but {ind.clone_of} is itself a clone")
        if ind.is_placeholder and (ind.test_results or ind.is_proband):
            raise PedigreeFormatError(
                f"placeholder {ind.id} must be untested and cannot be the proband")


def derive_matings(p: Pedigree) -> tuple[Mating, ...]:
    """One mating per distinct (father, mother) pair with offspring present."""
    children: dict[tuple[int, int], list[int]] = {}
    for ind in sorted(p, key=lambda i: i.id):
        if ind.has_both_parents:
            children.setdefault((ind.father_id, ind.mother_id), []).append(ind.id)
    ordered = sorted(children.items(), key=lambda item: min(item[1]))
    return tuple(
        Mating(number, father, mother, tuple(kids))
        for number, ((father, mother), kids) in enumerate(ordered, start=1)
    )


# ---------------------------------------------------------------------------
# parsing and serialization

def _sniff_delimiter(header_line: str) -> str:
    return "\t" if header_line.count("\t") > header_line.count(",") else ","


def _parse_int(cell: str, what: str, row: int) -> int:
    try:
        value = int(cell)
    except ValueError:
        raise PedigreeFormatError(f"{what} {cell!r} is not an integer", row) from None
    return value


def parse_pedigree(text: str, delimiter: Optional[str] = None) -> Pedigree:
    """Parse a delimited pedigree table.

    The delimiter (comma or tab) is sniffed from the header unless given.
    Required columns: ID, MotherID, FatherID, Sex, isProband. Any other
    column except CloneOf/IsPlaceholder is a variant test column. Errors
    carry the 1-based row number of the offending line.
    """
    lines = [ln for ln in text.splitlines()]
    if not any(ln.strip() for ln in lines):
        raise PedigreeFormatError("empty input table")
    if delimiter is None:
        delimiter = _sniff_delimiter(lines[0])
    rows = list(csv.reader(io.StringIO(text), delimiter=delimiter))

    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise PedigreeFormatError("duplicate column names in header", row=1)
    missing = [c for c in CORE_COLUMNS if c not in header]
    if missing:
        raise PedigreeFormatError(f"missing required column(s): {', '.join(missing)}", row=1)
    index = {name: i for i, name in enumerate(header)}
    variant_names = tuple(h for h in header if h not in RESERVED_COLUMNS)

    members: list[Individual] = []
    row_of: dict[int, int] = {}
    for rownum, raw in enumerate(rows[1:], start=2):
        if not any(cell.strip() for cell in raw):
            continue
        if len(raw) != len(header):
            raise PedigreeFormatError(
                f"expected {len(header)} fields, found {len(raw)}", rownum)
        cells = [c.strip() for c in raw]

        def get(column: str) -> str:
            return cells[index[column]]

        ind_id = _parse_int(get("ID"), "ID", rownum)
        if ind_id <= 0:
            raise PedigreeFormatError(f"ID must be positive, got {ind_id}", rownum)
        if ind_id in row_of:
            raise PedigreeFormatError(
                f"duplicate id {ind_id} (first seen on row {row_of[ind_id]})", rownum)
        row_of[ind_id] = rownum

        parents = {}
        for column, key in (("MotherID", "mother"), ("FatherID", "father")):
            cell = get(column)
            if cell.lower() in _MISSING:
                parents[key] = None
            else:
                parents[key] = _parse_int(cell, column, rownum)
        if ind_id in (parents["mother"], parents["father"]):
            raise PedigreeFormatError(f"individual {ind_id} is its own parent", rownum)

        sex_token = get("Sex").lower()
        if sex_token not in _SEXES:
            raise PedigreeFormatError(f"unknown sex token {get('Sex')!r}", rownum)
        sex = _SEXES[sex_token]

        proband_token = get("isProband").lower()
        if proband_token in _TRUE:
            is_proband = True
        elif proband_token in _FALSE:
            is_proband = False
        else:
            raise PedigreeFormatError(f"unknown isProband token {get('isProband')!r}", rownum)

        tests: dict[str, str] = {}
        for name in variant_names:
            cell = get(name).lower()
            if cell in _TEST_CARRIER:
                tests[name] = CARRIER
            elif cell in _TEST_NON_CARRIER:
                tests[name] = NON_CARRIER
            elif cell in _TEST_MISSING:
                pass
            else:
                raise PedigreeFormatError(
                    f"unknown test result {get(name)!r} for variant {name}", rownum)

        clone_of = None
        if CLONE_OF_COLUMN in index:
            cell = get(CLONE_OF_COLUMN)
            if cell.lower() not in _MISSING:
                clone_of = _parse_int(cell, CLONE_OF_COLUMN, rownum)

        is_placeholder = False
        if PLACEHOLDER_COLUMN in index:
            cell = get(PLACEHOLDER_COLUMN).lower()
            if cell in _TRUE:
                is_placeholder = True
            elif cell in _FALSE:
                is_placeholder = False
            else:
                raise PedigreeFormatError(
                    f"unknown IsPlaceholder token {get(PLACEHOLDER_COLUMN)!r}", rownum)

        members.append(Individual(
            id=ind_id, sex=sex, mother_id=parents["mother"], father_id=parents["father"],
            is_proband=is_proband, test_results=tests,
            clone_of=clone_of, is_placeholder=is_placeholder,
        ))

    # Referential checks, reported against the row that made the reference.
    by_id = {ind.id: ind for ind in members}
    for ind in members:
        for label, pid, want in (("MotherID", ind.mother_id, FEMALE),
                                 ("FatherID", ind.father_id, MALE)):
            if pid is None:
                continue
            parent = by_id.get(pid)
            if parent is None:
                raise PedigreeFormatError(
                    f"{label} {pid} does not match any individual", row_of[ind.id])
            if parent.sex != want:
                raise PedigreeFormatError(
                    f"{label} {pid} is recorded with sex {parent.sex}", row_of[ind.id])

    return Pedigree(members, variant_names)


def serialize_pedigree(p: Pedigree, delimiter: str = ",") -> str:
    """Write the table back out in canonical tokens.

    Columns are the core five, the variant columns, then CloneOf and
    IsPlaceholder. Missing parents and untested variants serialize as
    empty cells.
    """
    out = io.StringIO()
    writer = csv.writer(out, delimiter=delimiter, lineterminator="\n")
    writer.writerow(list(CORE_COLUMNS) + list(p.variant_names)
                    + [CLONE_OF_COLUMN, PLACEHOLDER_COLUMN])
    status_token = {CARRIER: "1", NON_CARRIER: "0"}
    for ind in p:
        row = [
            str(ind.id),
            "" if ind.mother_id is None else str(ind.mother_id),
            "" if ind.father_id is None else str(ind.father_id),
            ind.sex,
            "1" if ind.is_proband else "0",
        ]
        for name in p.variant_names:
            status = ind.test_results.get(name)
            row.append("" if status is None else status_token[status])
        row.append("" if ind.clone_of is None else str(ind.clone_of))
        row.append("1" if ind.is_placeholder else "0")
        writer.writerow(row)
    return out.getvalue()


def load_pedigree(path, delimiter: Optional[str] = None) -> Pedigree:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_pedigree(fh.read(), delimiter=delimiter)


def save_pedigree(p: Pedigree, path, delimiter: str = ",") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_pedigree(p, delimiter=delimiter))


def same_structure(a: Pedigree, b: Pedigree) -> bool:
    """Field-level equality after ordering by id; row order is ignored."""
    if a.ids != b.ids or a.variant_names != b.variant_names:
        return False
    for ind_id in sorted(a.ids):
        x, y = a.by_id(ind_id), b.by_id(ind_id)
        if (x.mother_id, x.father_id, x.sex, x.is_proband,
            dict(x.test_results), x.clone_of, x.is_placeholder) != \
           (y.mother_id, y.father_id, y.sex, y.is_proband,
            dict(y.test_results), y.clone_of, y.is_placeholder):
            return False
    return True


# ---------------------------------------------------------------------------
# repair and family structure

def fix_parents(p: Pedigree) -> Pedigree:
    """Give every half-orphan a placeholder co-parent.

    Children that name the same known parent on the same side share one
    placeholder, so an implied mating gains exactly one synthesized
    co-parent rather than one per child. Placeholder ids continue upward
    from the largest existing id; a pedigree without half-orphans is
    returned unchanged.
    """
    placeholder_for: dict[tuple[int, str], int] = {}
    assignment: dict[int, int] = {}
    next_id = p.max_id
    for ind in sorted(p, key=lambda i: i.id):
        if ind.has_both_parents or ind.is_founder:
            continue
        side = "father" if ind.father_id is None else "mother"
        known = ind.mother_id if side == "father" else ind.father_id
        key = (known, side)
        if key not in placeholder_for:
            next_id += 1
            placeholder_for[key] = next_id
        assignment[ind.id] = placeholder_for[key]

    if not assignment:
        return p

    members: list[Individual] = []
    for ind in p:
        pid = assignment.get(ind.id)
        if pid is not None:
            if ind.father_id is None:
                ind = replace(ind, father_id=pid)
            else:
                ind = replace(ind, mother_id=pid)
        members.append(ind)
    for (known, side), pid in sorted(placeholder_for.items(), key=lambda kv: kv[1]):
        members.append(Individual(
            id=pid, sex=MALE if side == "father" else FEMALE, is_placeholder=True))
    return Pedigree(members, p.variant_names)


def family_components(p: Pedigree) -> list[set[int]]:
    """Connected components over parent-child links, smallest member first."""
    parent = {ind.id: ind.id for ind in p}

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(x: int, y: int) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[ry] = rx

    for ind in p:
        if ind.mother_id is not None:
            union(ind.id, ind.mother_id)
        if ind.father_id is not None:
            union(ind.id, ind.father_id)

    groups: dict[int, set[int]] = {}
    for ind_id in parent:
        groups.setdefault(find(ind_id), set()).add(ind_id)
    return sorted(groups.values(), key=min)


def partition_families(p: Pedigree) -> list[Pedigree]:
    """Split a table into standalone connected families.

    Families come back ordered by their smallest member id and share the
    parent table's variant declaration.
    """
    components = family_components(p)
    if len(components) <= 1:
        return [p]
    families = []
    for component in components:
        members = [ind for ind in p if ind.id in component]
        families.append(Pedigree(members, p.variant_names))
    return families


def prune_unconnected(families: Sequence[Pedigree]) -> list[Pedigree]:
    """Keep only families that contain a proband.

    Dropped ids are logged as a warning. If nothing survives there is
    nothing to analyze, which is an input error.
    """
    kept, dropped = [], []
    for fam in families:
        (kept if fam.probands() else dropped).append(fam)
    if not kept:
        raise NoProbandError("no family in the input contains a proband")
    if dropped:
        dropped_ids = sorted(i for fam in dropped for i in fam.ids)
        logger.warning(
            "dropping %d individual(s) not connected to any proband: %s",
            len(dropped_ids), ", ".join(map(str, dropped_ids)))
    return kept


def restrict_variants(p: Pedigree, names: Sequence[str]) -> Pedigree:
    """Keep only the named variant columns, in their input order.

    Unknown names are an input error; columns not named are dropped with
    a warning since their test results stop influencing anything.
    """
    wanted = set(names)
    unknown = sorted(wanted - set(p.variant_names))
    if unknown:
        raise PedigreeFormatError(
            f"variant column(s) not present in the input: {', '.join(unknown)}")
    dropped = [v for v in p.variant_names if v not in wanted]
    if not dropped:
        return p
    logger.warning("ignoring variant column(s): %s", ", ".join(dropped))
    kept = tuple(v for v in p.variant_names if v in wanted)
    members = [
        replace(ind, test_results={k: v for k, v in ind.test_results.items() if k in wanted})
        for ind in p]
    return Pedigree(members, kept)


# ---------------------------------------------------------------------------
# genotype counting

def genotype_count(ind: Individual, variant_names: Sequence[str]) -> int:
    """Number of genotype states compatible with the individual's test results.

    Each untested variant contributes a factor of two (carrier or not); a
    tested variant is pinned. A fully tested individual therefore counts 1.
    """
    if not variant_names:
        raise ValueError("variant_names is empty; genotype counts are undefined")
    untested = sum(1 for name in variant_names if name not in ind.test_results)
    return 2 ** untested


def effective_variant_names(p: Pedigree) -> tuple[str, ...]:
    """Declared variant columns, or one synthetic uniform variant when the
    table has none (every individual then counts two genotype states).
    The synthetic variant never appears in serialized output."""
    return p.variant_names or ("_uniform_",)


def genotype_counts(p: Pedigree) -> dict[int, int]:
    names = effective_variant_names(p)
    return {ind.id: genotype_count(ind, names) for ind in p}


def genotype_log_weights(p: Pedigree) -> dict[int, float]:
    """Natural log of each individual's genotype count; the working currency
    of breaker selection (sums of logs instead of products of counts)."""
    return {ind_id: math.log(count) for ind_id, count in genotype_counts(p).items()}

"""
Skein mapping cones and iterated-cone E1 pages as rank bookkeeping.

A page is a list of reduced Khovanov tables of resolved diagrams, each with a
doubled (delta, q) shift. The checks compare a page against the exact homology
of the original link: the page dominates it bigrading by bigrading, has the same
graded Euler characteristic in every q, and differs from it by an even rank.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from diagrams import BraidWord, PlanarDiagram, closure, full_twist, resolve
from khovanov import Bigrading, KhTable, jones, kh_reduced

logger = logging.getLogger(__name__)


class ConeError(ValueError):
    """Raised for cone requests the bookkeeping does not support."""
    pass


@dataclass(frozen=True)
class ShiftedSummand:
    label: str
    table: KhTable
    shift: Bigrading

    @property
    def shifted_table(self) -> KhTable:
        return self.table.shifted(self.shift.delta2, self.shift.q2)

    def to_json(self) -> Dict:
        return {
            'label': self.label,
            'shift2': [self.shift.delta2, self.shift.q2],
            'entries': self.table.to_json()['entries'],
        }


@dataclass(frozen=True)
class ConePage:
    summands: Tuple[ShiftedSummand, ...]
    constants: Tuple[int, ...]

    def total_table(self, component_count: Optional[int] = None) -> KhTable:
        ranks: Counter = Counter()
        for summand in self.summands:
            ranks.update(summand.shifted_table.ranks)
        k = component_count if component_count is not None else 1
        return KhTable.from_ranks(ranks, k)

    @property
    def total_rank(self) -> int:
        return sum(summand.table.total_rank for summand in self.summands)

    def shifted_multiset(self) -> Counter:
        """Shifted tables up to reordering of the summands."""
        return Counter(summand.shifted_table.entries for summand in self.summands)

    def to_json(self) -> Dict:
        return {
            'summands': [summand.to_json() for summand in self.summands],
            'constants': list(self.constants),
        }


@dataclass
class ConeReport:
    defect: int = 0
    domination: List[str] = field(default_factory=list)
    euler: List[str] = field(default_factory=list)
    parity: List[str] = field(default_factory=list)

    @property
    def violations(self) -> List[str]:
        problems = self.domination + self.euler + self.parity
        if self.defect % 2:
            problems = problems + [f"rank defect {self.defect} is odd"]
        return problems

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> Dict:
        return {
            'passed': self.passed,
            'defect': self.defect,
            'dominates': not self.domination,
            'euler_equal': not self.euler,
            'defect_even': self.defect % 2 == 0,
            'violations': self.violations,
        }


# --- Single crossing ---

def skein_split(diagram: PlanarDiagram, crossing: int) -> Tuple[PlanarDiagram, PlanarDiagram, int]:
    """Oriented and unoriented resolutions at a positive crossing, and c = n-(D1) - n-(D)."""
    if not 0 <= crossing < diagram.crossing_count:
        raise ConeError(f"Crossing id {crossing} out of range (diagram has {diagram.crossing_count})")
    if diagram.crossings[crossing].sign < 0:
        raise ConeError(f"Crossing {crossing} is negative; only positive crossings are resolved")
    oriented = resolve(diagram, {crossing: 0})
    unoriented = resolve(diagram, {crossing: 1})
    c = unoriented.n_minus - diagram.n_minus
    logger.debug(f"Skein split at crossing {crossing}: c = {c}")
    return oriented, unoriented, c


def cone_page(diagram: PlanarDiagram, crossing: int, max_crossings: Optional[int] = None) -> ConePage:
    """The two shifted summands of the skein cone at one crossing."""
    oriented, unoriented, c = skein_split(diagram, crossing)
    return ConePage((
        ShiftedSummand('D0', kh_reduced(oriented, max_crossings), Bigrading(-1, 1)),
        ShiftedSummand('D1', kh_reduced(unoriented, max_crossings), Bigrading(-c, 3 * c + 2)),
    ), (c,))


def e1_dominates(page: ConePage, exact: KhTable) -> ConeReport:
    """Domination per bigrading, equal per-q Euler characteristics, even defect, summand parity."""
    report = ConeReport(defect=page.total_rank - exact.total_rank)
    total = page.total_table(exact.component_count)
    for grading, rank in exact.entries:
        if total.rank(grading) < rank:
            report.domination.append(f"{grading}: page rank {total.rank(grading)} < exact rank {rank}")

    page_euler, exact_euler = dict(jones(total).terms), dict(jones(exact).terms)
    for q2 in sorted(set(page_euler) | set(exact_euler)):
        if page_euler.get(q2, 0) != exact_euler.get(q2, 0):
            report.euler.append(f"q2={q2}: page Euler {page_euler.get(q2, 0)} != exact {exact_euler.get(q2, 0)}")

    for summand in page.summands:
        for problem in summand.shifted_table.check_parity(exact.component_count):
            report.parity.append(f"{summand.label}: {problem}")

    if report.passed:
        logger.info(f"E1 page dominates exact homology, defect {report.defect}")
    else:
        logger.warning(f"E1 page check failed: {report.violations}")
    return report


def cone_consistency(diagram: PlanarDiagram, crossing: int,
                     max_crossings: Optional[int] = None) -> ConeReport:
    """Cone page of one crossing checked against the exact table of the diagram."""
    return e1_dominates(cone_page(diagram, crossing, max_crossings), kh_reduced(diagram, max_crossings))


# --- Iterated cones ---

def _positive_closure(braid: BraidWord) -> PlanarDiagram:
    if not braid.is_positive:
        raise ConeError(f"Braid {braid} is not positive")
    return closure(braid)


def e1_page(braid: BraidWord, crossings: Sequence[int], max_crossings: Optional[int] = None) -> ConePage:
    """E1 page from resolving the listed crossings one after another.

    The fully 0-resolved closure is shifted by (-n/2, n/2); the i-th unoriented
    resolution R_i, with the earlier crossings 0-resolved, is shifted by
    (-(c_i - 1 + i)/2, (3c_i + 1 + i)/2) where c_i = n-(R_i).
    """
    diagram = _positive_closure(braid)
    if len(set(crossings)) != len(crossings):
        raise ConeError("Crossing ids must be distinct")
    if not crossings:
        raise ConeError("At least one crossing is required")
    for crossing in crossings:
        if not 0 <= crossing < diagram.crossing_count:
            raise ConeError(f"Crossing id {crossing} out of range (diagram has {diagram.crossing_count})")

    n = len(crossings)
    summands = [ShiftedSummand(f"beta_{n}", kh_reduced(resolve(diagram, {k: 0 for k in crossings}), max_crossings),
                               Bigrading(-n, n))]
    constants = []
    for i, crossing in enumerate(crossings, start=1):
        smoothings = {k: 0 for k in crossings[:i - 1]}
        smoothings[crossing] = 1
        resolved = resolve(diagram, smoothings)
        c = resolved.n_minus
        constants.append(c)
        summands.append(ShiftedSummand(f"R_{i}", kh_reduced(resolved, max_crossings),
                                       Bigrading(-(c - 1 + i), 3 * c + 1 + i)))
    logger.info(f"E1 page of {braid} at crossings {list(crossings)}: constants {constants}")
    return ConePage(tuple(summands), tuple(constants))


def twist_region_e1(b1: BraidWord, index: int, n: int, b2: BraidWord,
                    max_crossings: Optional[int] = None, cross_check: bool = True) -> ConePage:
    """E1 page of b1 * sigma_index^n * b2 built from one resolution R of the whole twist region.

    Every summand of the iterated page differs from R by Reidemeister 1 moves, so
    only Kh(R) and Kh(closure(b1 b2)) are computed. With cross_check the result is
    compared with e1_page on the same crossings.
    """
    if n < 1:
        raise ConeError(f"Twist region length must be at least 1, got {n}")
    for word in (b1, b2):
        if not word.is_positive:
            raise ConeError(f"Braid {word} is not positive")
    braid = b1 * BraidWord.generator(b1.strands, index) ** n * b2
    diagram = _positive_closure(braid)
    region = list(range(len(b1), len(b1) + n))

    resolved = resolve(diagram, {k: (1 if k == region[0] else 0) for k in region})
    c = resolved.n_minus
    region_table = kh_reduced(resolved, max_crossings)
    summands = [ShiftedSummand("beta_bar", kh_reduced(closure(b1 * b2), max_crossings), Bigrading(-n, n))]
    for q in range(n):
        summands.append(ShiftedSummand(f"R[q={q}]", region_table,
                                       Bigrading(-(c - 1) - n, 3 * c + 1 + 2 * q + n)))
    page = ConePage(tuple(summands), (c,))

    if cross_check:
        iterated = e1_page(braid, region, max_crossings)
        if iterated.shifted_multiset() != page.shifted_multiset():
            raise ConeError(f"Twist-region page of {braid} disagrees with the iterated page "
                            f"(constants {list(iterated.constants)} vs c = {c})")
    return page


# --- Pipelines used by the torus-link and branch-set arguments ---

@dataclass
class PipelineStep:
    label: str
    page: ConePage
    exact: KhTable
    report: ConeReport

    def to_json(self) -> Dict:
        return {
            'label': self.label,
            'page': self.page.to_json(),
            'exact': self.exact.to_json(),
            'report': self.report.to_json(),
        }


def torus_step_page(m: int, max_crossings: Optional[int] = None) -> PipelineStep:
    """Two-crossing page of closure((s2 s1)^m), resolving its first s2 and first s1."""
    if m < 2:
        raise ConeError(f"Torus step needs m >= 2, got {m}")
    braid = BraidWord(3, ((2, 1), (1, 1))) ** m
    page = e1_page(braid, [0, 1], max_crossings)
    exact = kh_reduced(closure(braid), max_crossings)
    return PipelineStep(f"T(3,{m})", page, exact, e1_dominates(page, exact))


def twist_pipeline(t: int, max_crossings: Optional[int] = None) -> List[PipelineStep]:
    """The three twist-region resolutions leading from T(3,3t) to the branch set tau_t(l)."""
    delta = full_twist(3) ** t
    s1 = BraidWord.generator(3, 1)
    s2 = BraidWord.generator(3, 2)
    identity = BraidWord.identity(3)
    stages = [
        ("s2^2 D^t", identity, 2, 2, delta),
        ("s2 s1^3 s2 D^t", s2, 1, 3, s2 * delta),
        ("s1 s2 s1^3 s2 D^t", identity, 1, 1, s2 * s1 ** 3 * s2 * delta),
    ]
    steps = []
    for label, b1, index, n, b2 in stages:
        page = twist_region_e1(b1, index, n, b2, max_crossings)
        exact = kh_reduced(closure(b1 * BraidWord.generator(3, index, n) * b2), max_crossings)
        steps.append(PipelineStep(label, page, exact, e1_dominates(page, exact)))
    return steps

"""
Perturbed (Bar-Natan, characteristic 2) reduced homology collapsed onto diagonals.

The perturbed complex only preserves the homological grading, so ranks are
reported per diagonal n = delta + q. The total rank is 2^(k-1) for a k-component
link and the diagonal ranks are fixed by pairwise linking numbers.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Mapping, Optional, Tuple

from diagrams import LinkMetadata, PlanarDiagram, link_metadata
from khovanov import KhTable, build_reduced_complex, chain_ranks

logger = logging.getLogger(__name__)


class RankLawError(RuntimeError):
    """Raised when perturbed ranks break the total-rank or linking-number law."""
    pass


@dataclass(frozen=True)
class DiagonalRanks:
    entries: Tuple[Tuple[int, int], ...]

    @classmethod
    def from_mapping(cls, ranks: Mapping[int, int]) -> 'DiagonalRanks':
        return cls(tuple(sorted((n, r) for n, r in ranks.items() if r)))

    @property
    def ranks(self) -> Dict[int, int]:
        return dict(self.entries)

    @property
    def total(self) -> int:
        return sum(rank for _, rank in self.entries)

    def to_json(self) -> Dict:
        return {'total': self.total, 'diagonals': {str(n): r for n, r in self.entries}}


def lk_rank_formula(meta: LinkMetadata) -> DiagonalRanks:
    """Half the number of component subsets X with n = 2 * sum of lk(l, m) over l in X, m not in X."""
    k = meta.component_count
    counts: Counter = Counter()
    for choice in product((False, True), repeat=k):
        n = 2 * sum(meta.linking[l][m] for l in range(k) for m in range(k) if choice[l] and not choice[m])
        counts[n] += 1
    for n, count in counts.items():
        if count % 2:
            raise RankLawError(f"Odd subset count {count} on diagonal {n}")
    return DiagonalRanks.from_mapping({n: count // 2 for n, count in counts.items()})


def bn_homology_rank(diagram: PlanarDiagram, max_crossings: Optional[int] = None) -> Tuple[int, DiagonalRanks]:
    """Homology of the perturbed reduced complex; both rank laws are enforced."""
    meta = link_metadata(diagram)
    complex_ = build_reduced_complex(diagram, perturbed=True, max_crossings=max_crossings)
    by_height = chain_ranks(complex_.slices[None]) if complex_.slices else {}
    diagonals = DiagonalRanks.from_mapping(
        {height - diagram.n_minus: rank for height, rank in by_height.items()})

    expected_total = 2 ** (meta.component_count - 1)
    if diagonals.total != expected_total:
        raise RankLawError(f"Perturbed rank {diagonals.total}, expected {expected_total} "
                           f"for {meta.component_count} components")
    expected = lk_rank_formula(meta)
    if diagonals != expected:
        raise RankLawError(f"Perturbed diagonals {diagonals.ranks} differ from linking-number "
                           f"prediction {expected.ranks}")
    logger.info(f"Perturbed homology: total {diagonals.total}, diagonals {diagonals.ranks}")
    return diagonals.total, diagonals


@dataclass
class LeeReport:
    diagonal_sums: Dict[int, int]
    bound: Dict[int, int]
    violations: List[str] = field(default_factory=list)
    defect: int = 0

    @property
    def parity_ok(self) -> bool:
        return self.defect % 2 == 0

    @property
    def passed(self) -> bool:
        return not self.violations and self.parity_ok

    def to_json(self) -> Dict:
        return {
            'passed': self.passed,
            'diagonal_sums': {str(n): r for n, r in sorted(self.diagonal_sums.items())},
            'bound': {str(n): r for n, r in sorted(self.bound.items())},
            'violations': list(self.violations),
            'defect': self.defect,
            'parity_ok': self.parity_ok,
        }


def lee_lower_bound_check(table: KhTable, ranks: DiagonalRanks) -> LeeReport:
    """Reduced Khovanov diagonal sums must dominate the perturbed ranks, with an even surplus."""
    sums: Dict[int, int] = Counter()
    for grading, rank in table.entries:
        if (grading.delta2 + grading.q2) % 2:
            continue
        sums[grading.u] += rank
    report = LeeReport(dict(sums), ranks.ranks, defect=table.total_rank - ranks.total)
    for n, needed in ranks.entries:
        if sums.get(n, 0) < needed:
            report.violations.append(f"diagonal {n}: Kh-tilde rank {sums.get(n, 0)} < perturbed rank {needed}")
    if not report.parity_ok:
        report.violations.append(f"rank difference {report.defect} is odd")
    if report.violations:
        logger.warning(f"Lower-bound check failed: {report.violations}")
    return report

"""
Branch sets of surgeries on twist knots, their widths, and the finite-filling verdict.

The branch set of n-surgery on the twist knot K_t is the closure of
sigma_1^(N+n) (sigma_2 sigma_1^3 sigma_2) Delta^t with N = 2 for odd t and N = 6
for even t. Rational slopes p/q replace the sigma_1 twists by a rational tangle
built from the continued fraction of p/q.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from config import Config
from diagrams import (BraidWord, DiagramBuilder, PlanarDiagram, closure, coloring_determinant,
                      full_twist, link_metadata)
from khovanov import KhTable, ResourceLimitError, kh_reduced, width
from validators import ValidationError

logger = logging.getLogger(__name__)

EXTENDED_FROM_T = 3


class ClosureConventionError(RuntimeError):
    """Raised when no twist handedness gives a rational closure with det = |p|."""
    pass


def ell(t: int) -> int:
    """The framing with minimal width: -1 for odd t, -5 for even t."""
    return -1 if t % 2 else -5


def _base_exponent(t: int) -> int:
    return 2 if t % 2 else 6


def _tail(t: int) -> BraidWord:
    s1, s2 = BraidWord.generator(3, 1), BraidWord.generator(3, 2)
    return s2 * s1 ** 3 * s2 * full_twist(3) ** t


def beta(t: int, n: int) -> BraidWord:
    """sigma1^(N+n) sigma2 sigma1^3 sigma2 Delta^t, N = 2 for odd t and 6 for even t; closes to tau_t(n)."""
    if t < 0:
        raise ValidationError(f"Twist parameter t must be non-negative, got {t}")
    return BraidWord.generator(3, 1, _base_exponent(t) + n) * _tail(t)


def tau(t: int, n: int) -> PlanarDiagram:
    """Branch set of n-surgery on K_t as a closed braid diagram."""
    diagram = closure(beta(t, n))
    logger.debug(f"tau({t}, {n}): {diagram.crossing_count} crossings, "
                 f"{link_metadata(diagram).component_count} component(s)")
    return diagram


@dataclass(frozen=True)
class TwistKnotSpec:
    t: int
    n: int

    @property
    def ell(self) -> int:
        return ell(self.t)

    @property
    def braid(self) -> BraidWord:
        return beta(self.t, self.n)

    @property
    def letter_count(self) -> int:
        return abs(_base_exponent(self.t) + self.n) + 5 + 6 * self.t

    @property
    def is_positive(self) -> bool:
        return _base_exponent(self.t) + self.n >= 0

    @property
    def component_count(self) -> int:
        return self.braid.cycle_count()

    def diagram(self) -> PlanarDiagram:
        return tau(self.t, self.n)


# --- Rational slopes ---

def continued_fraction(p: int, q: int) -> List[int]:
    """Expansion [a1, ..., ak] with p/q = a1 + 1/(a2 + 1/(... + 1/ak))."""
    if q == 0:
        raise ValidationError("q = 0 is the trivial filling and has no expansion")
    if gcd(p, q) != 1:
        raise ValidationError(f"Slope {p}/{q} is not in lowest terms")
    if q < 0:
        p, q = -p, -q
    terms = []
    while q:
        a, r = divmod(p, q)
        terms.append(a)
        p, q = q, r
    return terms


def evaluate_continued_fraction(terms: Sequence[int]) -> Fraction:
    """Inverse of continued_fraction."""
    if not terms:
        raise ValidationError("Empty continued fraction")
    value = Fraction(terms[-1])
    for term in reversed(terms[:-1]):
        value = term + 1 / value
    return value


def _rational_closure(t: int, terms: Sequence[int], handedness: int) -> PlanarDiagram:
    builder = DiagramBuilder()
    start = [builder.new_edge() for _ in range(3)]
    current = list(start)

    def braid_word(word: BraidWord):
        for index, sign in word.letters:
            i = index - 1
            current[i], current[i + 1] = builder.add_braid_letter(current[i], current[i + 1], sign)

    braid_word(BraidWord.generator(3, 1, _base_exponent(t)))

    k = len(terms)
    if k % 2:
        bottom_left = top_left = builder.new_edge()
        bottom_right = top_right = builder.new_edge()
    else:
        bottom_left = bottom_right = builder.new_edge()
        top_left = top_right = builder.new_edge()
    for j in range(k, 0, -1):
        a = terms[j - 1]
        sign = 1 if a > 0 else -1
        for _ in range(abs(a)):
            if j % 2:
                top_left, top_right = builder.add_braid_letter(top_left, top_right, sign, hinted=False)
            else:
                top_right, bottom_right = builder.add_side_twist(top_right, bottom_right, handedness * sign)

    builder.identify(current[0], bottom_left)
    builder.identify(current[1], bottom_right)
    current[0], current[1] = top_left, top_right
    braid_word(_tail(t))
    for position, edge in enumerate(current):
        builder.identify(start[position], edge)
    return builder.build(start[0])


def tau_rational(t: int, p: int, q: int) -> PlanarDiagram:
    """Branch set of p/q-surgery; the twist handedness is pinned by det = |p|."""
    if q == 0:
        if abs(p) != 1:
            raise ValidationError(f"Slope {p}/0 is not in lowest terms; the trivial filling is 1/0")
        return PlanarDiagram((), 1, (1,))
    terms = continued_fraction(p, q)
    found = []
    for handedness in (1, -1):
        diagram = _rational_closure(t, terms, handedness)
        det = coloring_determinant(diagram)
        found.append(det)
        if det == abs(p):
            logger.debug(f"tau_rational({t}, {p}/{q}): expansion {terms}, handedness {handedness}, "
                         f"{diagram.crossing_count} crossings")
            return diagram
    raise ClosureConventionError(f"No closure of {p}/{q} = {terms} has det {abs(p)} (got {found})")


# --- Width sweeps ---

def require_engine(t: int):
    """Refuse t past the default range unless the extended engine is enabled."""
    if t >= EXTENDED_FROM_T and not Config.ENABLE_EXTENDED:
        raise ResourceLimitError(f"t = {t} needs the extended engine (set KHWIDTH_ENABLE_EXTENDED=true or pass --extended)")


def _width_at(job: Tuple[int, int, Optional[int]]) -> Tuple[int, int]:
    t, n, max_crossings = job
    return n, width(kh_reduced(tau(t, n), max_crossings))


@dataclass
class WidthProfile:
    t: int
    entries: Dict[int, int]
    jump_framing: Optional[int]
    w_K: int
    two_valued: bool

    def to_json(self) -> Dict:
        return {
            't': self.t,
            'widths': {str(n): w for n, w in sorted(self.entries.items())},
            'jump_framing': self.jump_framing,
            'w_K': self.w_K,
            'two_valued': self.two_valued,
        }


def width_profile(t: int, n_lo: int, n_hi: int, workers: Optional[int] = None,
                  max_crossings: Optional[int] = None) -> WidthProfile:
    """Widths of tau(t, n) for n_lo <= n <= n_hi, computed in a process pool."""
    minimal = ell(t)
    if n_lo > minimal or n_hi < minimal + 1:
        raise ValidationError(f"Sweep [{n_lo}, {n_hi}] must contain {minimal} and {minimal + 1}")
    require_engine(t)
    jobs = [(t, n, max_crossings) for n in range(n_lo, n_hi + 1)]
    count = min(Config.worker_count(workers), len(jobs))
    if count <= 1:
        results = [_width_at(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=count, initializer=Config.pin_single_worker) as pool:
            results = list(pool.map(_width_at, jobs))
    entries = dict(results)
    for n, w in sorted(entries.items()):
        logger.info(f"width(tau({t}, {n})) = {w}")

    jump = next((n for n in sorted(entries) if n + 1 in entries and entries[n + 1] == entries[n] + 1), None)
    w_k = min(entries.values())
    values = set(entries.values())
    two_valued = values == {w_k, w_k + 1}
    if not two_valued:
        logger.warning(f"Width sweep for t = {t} takes values {sorted(values)}, expected two consecutive values")
    return WidthProfile(t, entries, jump, w_k, two_valued)


@dataclass
class FillingVerdict:
    t: int
    w_K: int
    jump_framing: Optional[int]
    verdict: str
    caveats: List[str] = field(default_factory=list)

    def to_json(self) -> Dict:
        return {
            't': self.t,
            'w_K': self.w_K,
            'jump_framing': self.jump_framing,
            'verdict': self.verdict,
            'caveats': list(self.caveats),
        }


def finite_filling_report(t: int, workers: Optional[int] = None,
                          max_crossings: Optional[int] = None) -> FillingVerdict:
    """Width obstruction to finite fillings of K_t: a filling with finite pi_1 has a branch set of width <= 2."""
    minimal = ell(t)
    profile = width_profile(t, minimal, minimal + 1, workers, max_crossings)
    w_k = profile.w_K
    if w_k > 2:
        verdict, caveats = "no finite fillings", [
            "non-integral slopes rely on the width lower bound for rational closures (sampled, not proved)",
        ]
    elif t == 1 and w_k == 2 and profile.jump_framing == minimal:
        verdict, caveats = "no finite fillings", [
            "non-negative slopes by width",
            "negative slopes by amphichirality (external fact, not computed)",
        ]
    else:
        verdict, caveats = "inconclusive", [f"w_K = {w_k} <= 2, the width obstruction does not apply"]
    logger.info(f"Finite-filling verdict for t = {t}: {verdict} (w_K = {w_k})")
    return FillingVerdict(t, w_k, profile.jump_framing, verdict, caveats)


# --- Structural checks on the branch-set tables ---

@dataclass
class StructureReport:
    name: str
    details: Dict = field(default_factory=dict)
    problems: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.problems

    def to_json(self) -> Dict:
        return {'name': self.name, 'passed': self.passed, 'details': self.details, 'problems': list(self.problems)}


def extra_column_check(t: int, max_crossings: Optional[int] = None) -> StructureReport:
    """tau_t(l+1) is tau_t(l) shifted by (-1/2, 1/2) plus one generator in a new rightmost column."""
    require_engine(t)
    minimal = ell(t)
    lower = kh_reduced(tau(t, minimal), max_crossings)
    upper = kh_reduced(tau(t, minimal + 1), max_crossings)
    moved = lower.shifted(-1, 1)
    report = StructureReport(f"extra column t={t}")

    difference = dict(upper.ranks)
    for grading, rank in moved.entries:
        difference[grading] = difference.get(grading, 0) - rank
    extra = {g: r for g, r in difference.items() if r}
    if any(r < 0 for r in extra.values()) or list(extra.values()) != [1]:
        cells = ", ".join(f"({g.delta2},{g.q2}):{r}" for g, r in sorted(extra.items()))
        report.problems.append(f"difference is not a single generator: {cells}")
        return report

    grading = next(iter(extra))
    report.details = {'extra': [grading.delta2, grading.q2]}
    if grading.delta2 != max(moved.deltas) + 2:
        report.problems.append(f"extra generator at delta2={grading.delta2}, expected {max(moved.deltas) + 2}")
    adjacent = upper.column(grading.delta2 - 2)
    if not adjacent or grading.q2 >= max(adjacent):
        report.problems.append(f"extra generator q2={grading.q2} is not below the adjacent column's maximum")
    return report


def stability_check(t: int, m_max: int = 5, max_crossings: Optional[int] = None) -> StructureReport:
    """For m = 1..m_max: width(tau_t(l+m)) = t+2 and the last column has rank at most m."""
    require_engine(t)
    report = StructureReport(f"stability t={t}")
    for m in range(1, m_max + 1):
        table = kh_reduced(tau(t, ell(t) + m), max_crossings)
        last = sum(table.column(max(table.deltas)).values())
        report.details[str(m)] = {'width': width(table), 'last_column_rank': last}
        if width(table) != t + 2:
            report.problems.append(f"m={m}: width {width(table)} != {t + 2}")
        if last > m:
            report.problems.append(f"m={m}: last column rank {last} > {m}")
    return report


def rational_width_samples(t: int, slopes: Sequence[Tuple[int, int]],
                           max_crossings: Optional[int] = None) -> StructureReport:
    """Width of sampled rational branch sets; each must be at least t+1."""
    require_engine(t)
    report = StructureReport(f"rational samples t={t}")
    for p, q in slopes:
        table = kh_reduced(tau_rational(t, p, q), max_crossings)
        report.details[f"{p}/{q}"] = width(table)
        if width(table) < t + 1:
            report.problems.append(f"{p}/{q}: width {width(table)} < {t + 1}")
    return report


def branch_set_table(t: int, n: int, max_crossings: Optional[int] = None) -> KhTable:
    """Reduced table of tau(t, n), behind the extended-engine gate."""
    require_engine(t)
    return kh_reduced(tau(t, n), max_crossings)


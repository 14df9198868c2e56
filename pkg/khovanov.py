"""
Reduced Khovanov homology over the two-element field.

Tables are reported in the diagonal (delta, q) convention with both gradings
stored doubled, so half-integers stay exact. Small diagrams go through the cube
of resolutions below; larger ones through the reduction pipeline in scanning.py.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import sympy

from config import Config
from diagrams import PlanarDiagram, link_metadata

logger = logging.getLogger(__name__)

# Smaller complexes are eliminated in-process; worker start-up would dominate.
PARALLEL_MIN_GENERATORS = 4096


class ResourceLimitError(RuntimeError):
    """Raised when a diagram exceeds the configured crossing cap."""
    pass


class GradingMismatchError(RuntimeError):
    """Raised when two computations of the same grading-derived invariant disagree."""
    pass


# --- Gradings and tables ---

@dataclass(frozen=True, order=True)
class Bigrading:
    delta2: int
    q2: int

    @property
    def delta(self) -> Fraction:
        return Fraction(self.delta2, 2)

    @property
    def q(self) -> Fraction:
        return Fraction(self.q2, 2)

    @property
    def u(self) -> int:
        """Homological grading delta + q."""
        return (self.delta2 + self.q2) // 2

    def shifted(self, delta2: int, q2: int) -> 'Bigrading':
        return Bigrading(self.delta2 + delta2, self.q2 + q2)


def calibrate(i: int, j: int) -> Bigrading:
    """Map internal gradings to doubled (delta, q).

    i = |v| - n_minus and j = (#1 - #x) + |v| + n_plus - 2 n_minus, counting the
    basepoint circle (always labelled x). The offset is fixed by the unknot,
    two-component unlink, Hopf link and trefoil tables.
    """
    q2 = j + 1
    return Bigrading(2 * i - q2, q2)


def _half(value2: int) -> str:
    return str(value2 // 2) if value2 % 2 == 0 else f"{value2}/2"


@dataclass(frozen=True)
class KhTable:
    """Bigraded ranks of reduced Khovanov homology; absent bigradings have rank 0."""
    entries: Tuple[Tuple[Bigrading, int], ...]
    component_count: int

    @classmethod
    def from_ranks(cls, ranks: Mapping, component_count: int) -> 'KhTable':
        merged: Dict[Bigrading, int] = defaultdict(int)
        for key, rank in ranks.items():
            grading = key if isinstance(key, Bigrading) else Bigrading(*key)
            merged[grading] += rank
        if any(rank < 0 for rank in merged.values()):
            raise ValueError("Ranks must be non-negative")
        return cls(tuple(sorted((b, r) for b, r in merged.items() if r > 0)), component_count)

    @property
    def ranks(self) -> Dict[Bigrading, int]:
        return dict(self.entries)

    def rank(self, grading: Bigrading) -> int:
        return self.ranks.get(grading, 0)

    @property
    def total_rank(self) -> int:
        return sum(rank for _, rank in self.entries)

    @property
    def deltas(self) -> List[int]:
        return sorted({grading.delta2 for grading, _ in self.entries})

    def column(self, delta2: int) -> Dict[int, int]:
        return {grading.q2: rank for grading, rank in self.entries if grading.delta2 == delta2}

    def is_empty(self) -> bool:
        return not self.entries

    def shifted(self, delta2: int, q2: int) -> 'KhTable':
        return KhTable(tuple((g.shifted(delta2, q2), r) for g, r in self.entries), self.component_count)

    def direct_sum(self, other: 'KhTable') -> 'KhTable':
        ranks = Counter(self.ranks)
        ranks.update(other.ranks)
        return KhTable.from_ranks(ranks, self.component_count)

    def check_parity(self, component_count: Optional[int] = None) -> List[str]:
        """Bigradings violating u-integrality or the q-parity of the component count."""
        k = self.component_count if component_count is None else component_count
        problems = []
        for grading, _ in self.entries:
            if (grading.delta2 + grading.q2) % 2:
                problems.append(f"{grading}: delta + q is not an integer")
            elif (grading.q2 - (k - 1)) % 2:
                problems.append(f"{grading}: 2q has the wrong parity for {k} components")
        return problems

    def to_json(self) -> Dict:
        return {
            'components': self.component_count,
            'entries': [{'delta2': g.delta2, 'q2': g.q2, 'rank': r} for g, r in self.entries],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> 'KhTable':
        ranks = {(entry['delta2'], entry['q2']): entry['rank'] for entry in data['entries']}
        return cls.from_ranks(ranks, data['components'])

    def ascii(self) -> str:
        """Figure-style rendering: delta runs left to right, q runs bottom to top."""
        if not self.entries:
            return "(empty)"
        deltas = self.deltas
        q_values = sorted({g.q2 for g, _ in self.entries}, reverse=True)
        ranks = self.ranks
        width = max(4, max(len(_half(d)) for d in deltas) + 1)
        label = max(len(_half(q)) for q in q_values) + 1
        lines = []
        for q2 in q_values:
            cells = ''.join(str(ranks.get(Bigrading(d, q2), '.')).rjust(width) for d in deltas)
            lines.append(f"{_half(q2).rjust(label)} |{cells}")
        lines.append(' ' * label + ' +' + '-' * (width * len(deltas)))
        lines.append(' ' * (label + 2) + ''.join(_half(d).rjust(width) for d in deltas) + '   (delta)')
        return '\n'.join(lines)


@dataclass(frozen=True)
class LaurentPolynomial:
    """Integer Laurent polynomial in t^(1/2); terms are (doubled exponent, coefficient)."""
    terms: Tuple[Tuple[int, int], ...] = ()

    @classmethod
    def from_mapping(cls, coefficients: Mapping[int, int]) -> 'LaurentPolynomial':
        return cls(tuple(sorted((e, c) for e, c in coefficients.items() if c)))

    def __add__(self, other: 'LaurentPolynomial') -> 'LaurentPolynomial':
        total = Counter(dict(self.terms))
        total.update(dict(other.terms))
        return LaurentPolynomial.from_mapping(total)

    def at_minus_one(self) -> int:
        """|V(-1)| with t^(1/2) = i."""
        real = imaginary = 0
        for exp2, coefficient in self.terms:
            phase = exp2 % 4
            if phase == 0:
                real += coefficient
            elif phase == 2:
                real -= coefficient
            elif phase == 1:
                imaginary += coefficient
            else:
                imaginary -= coefficient
        if real and imaginary:
            raise GradingMismatchError(f"Mixed exponent parities in {self}")
        return abs(real) + abs(imaginary)

    def to_sympy(self):
        t = sympy.Symbol('t', positive=True)
        return sympy.Add(*[c * t ** sympy.Rational(e, 2) for e, c in self.terms])

    def to_json(self) -> Dict[str, int]:
        return {str(e): c for e, c in self.terms}

    def __str__(self) -> str:
        return str(self.to_sympy()) if self.terms else "0"


# --- Cube of resolutions ---

@dataclass(frozen=True)
class CircleStructure:
    count: int
    circle_of_edge: Dict[int, int]
    basepoint_circle: int


class _Cube:
    """Edge positions and per-crossing smoothing pairs of a diagram."""

    def __init__(self, diagram: PlanarDiagram):
        self.diagram = diagram
        self.edges = diagram.edges
        self.position = {edge: index for index, edge in enumerate(self.edges)}
        self.pairs = []
        for crossing in diagram.crossings:
            self.pairs.append(tuple(
                tuple((self.position[a], self.position[b]) for a, b in crossing.smoothing(bit))
                for bit in (0, 1)
            ))
        self.basepoint = self.position[diagram.basepoint]

    def circles(self, vertex: int) -> Tuple[List[int], int]:
        parent = list(range(len(self.edges)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for k, options in enumerate(self.pairs):
            for a, b in options[(vertex >> k) & 1]:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[ra] = rb
        labels: Dict[int, int] = {}
        circle = []
        for x in range(len(self.edges)):
            circle.append(labels.setdefault(find(x), len(labels)))
        return circle, len(labels)


def _vertex(bits: Union[int, Sequence[int]], n: int) -> int:
    if isinstance(bits, int):
        return bits
    if len(bits) != n:
        raise ValueError(f"Resolution vector has length {len(bits)}, diagram has {n} crossings")
    return sum(1 << k for k, bit in enumerate(bits) if bit)


def resolution_circles(diagram: PlanarDiagram, bits: Union[int, Sequence[int]]) -> CircleStructure:
    """Circles of the complete resolution with bit k choosing the smoothing of crossing k."""
    cube = _Cube(diagram)
    circle, count = cube.circles(_vertex(bits, diagram.crossing_count))
    return CircleStructure(count, {edge: circle[i] for i, edge in enumerate(cube.edges)}, circle[cube.basepoint])


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass
class ChainSlice:
    """One quantum level (or the whole complex when perturbed): generators and boundary by degree."""
    quantum: Optional[int]
    groups: Dict[int, List[Tuple[int, int]]] = field(default_factory=dict)
    boundary: Dict[int, List[int]] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return sum(len(group) for group in self.groups.values())


@dataclass
class GradedComplex:
    """Reduced cube complex; generators are (vertex bits, circle label bits), x = set bit."""
    crossing_count: int
    n_plus: int
    n_minus: int
    component_count: int
    perturbed: bool
    slices: Dict[Optional[int], ChainSlice]

    @property
    def generator_count(self) -> int:
        return sum(piece.size for piece in self.slices.values())


def build_reduced_complex(diagram: PlanarDiagram, perturbed: bool = False,
                          max_crossings: Optional[int] = None) -> GradedComplex:
    """Cube of resolutions restricted to states whose basepoint circle carries x.

    The standard complex is bucketed by internal quantum level. With perturbed=True
    the characteristic-2 Bar-Natan maps are used (x*x = x, 1 -> 1x + x1 + 11), which
    do not preserve q, so the whole complex is a single slice.
    """
    n = diagram.crossing_count
    cap = max_crossings if max_crossings is not None else Config.CUBE_MAX_CROSSINGS
    if n > cap:
        raise ResourceLimitError(f"Cube of resolutions limited to {cap} crossings, diagram has {n}")

    components = link_metadata(diagram).component_count
    cube = _Cube(diagram)
    shift = diagram.n_plus - 2 * diagram.n_minus
    structure = [cube.circles(vertex) for vertex in range(1 << n)]

    def quantum(vertex: int, labels: int) -> int:
        count = structure[vertex][1]
        return count - 2 * bin(labels).count('1') + bin(vertex).count('1') + shift

    slices: Dict[Optional[int], ChainSlice] = {}
    index: Dict[Tuple[int, int], int] = {}
    for vertex in range(1 << n):
        circle, count = structure[vertex]
        base = 1 << circle[cube.basepoint]
        others = [c for c in range(count) if c != circle[cube.basepoint]]
        height = bin(vertex).count('1')
        for choice in range(1 << len(others)):
            labels = base | sum(1 << others[k] for k in _bits(choice))
            key = None if perturbed else quantum(vertex, labels)
            piece = slices.setdefault(key, ChainSlice(key))
            group = piece.groups.setdefault(height, [])
            index[(vertex, labels)] = len(group)
            group.append((vertex, labels))

    for piece in slices.values():
        for height, group in piece.groups.items():
            piece.boundary[height] = [
                _boundary_mask(cube, structure, vertex, labels, perturbed, index)
                for vertex, labels in group
            ]

    complex_ = GradedComplex(n, diagram.n_plus, diagram.n_minus, components, perturbed, slices)
    logger.debug(f"Built {'perturbed' if perturbed else 'graded'} cube: {n} crossings, "
                 f"{complex_.generator_count} generators in {len(slices)} slices")
    if Config.DEBUG_CHECKS:
        check_boundary_squared(complex_)
    return complex_


def _boundary_mask(cube: _Cube, structure, vertex: int, labels: int, perturbed: bool, index) -> int:
    circle, _ = structure[vertex]
    mask = 0
    for k, options in enumerate(cube.pairs):
        if (vertex >> k) & 1:
            continue
        target = vertex | (1 << k)
        target_circle, _ = structure[target]
        (a, b), (c, _) = options[0]
        first, second = circle[a], circle[c]

        # labels of the circles the saddle does not touch
        moved, seen = 0, {first, second}
        for position, source in enumerate(circle):
            if source not in seen:
                seen.add(source)
                if (labels >> source) & 1:
                    moved |= 1 << target_circle[position]

        images = []
        if first != second:
            merged = 1 << target_circle[a]
            x_first, x_second = (labels >> first) & 1, (labels >> second) & 1
            if x_first and x_second:
                if perturbed:
                    images.append(moved | merged)
            elif x_first or x_second:
                images.append(moved | merged)
            else:
                images.append(moved)
        else:
            left, right = 1 << target_circle[a], 1 << target_circle[b]
            if (labels >> first) & 1:
                images.append(moved | left | right)
            else:
                images.extend((moved | left, moved | right))
                if perturbed:
                    images.append(moved)
        for image in images:
            mask ^= 1 << index[(target, image)]
    return mask


def check_boundary_squared(complex_: GradedComplex):
    """Raise AssertionError unless d o d = 0 on every slice."""
    for key, piece in complex_.slices.items():
        for height, columns in piece.boundary.items():
            following = piece.boundary.get(height + 1)
            if following is None:
                continue
            for column in columns:
                image = 0
                for target in _bits(column):
                    image ^= following[target]
                if image:
                    raise AssertionError(f"d o d != 0 in slice {key} at degree {height}")


def gf2_rank(columns: Sequence[int]) -> int:
    """Rank over F2 of bit-packed columns, reducing the sparsest columns first."""
    pivots: Dict[int, int] = {}
    rank = 0
    for column in sorted(columns, key=lambda value: bin(value).count('1')):
        while column:
            low = column & -column
            pivot = pivots.get(low)
            if pivot is None:
                pivots[low] = column
                rank += 1
                break
            column ^= pivot
    return rank


def chain_ranks(piece: ChainSlice) -> Dict[int, int]:
    """Homology rank in each homological degree of one slice."""
    boundary_rank = {height: gf2_rank(columns) for height, columns in piece.boundary.items()}
    ranks = {}
    for height, group in piece.groups.items():
        rank = len(group) - boundary_rank.get(height, 0) - boundary_rank.get(height - 1, 0)
        if rank:
            ranks[height] = rank
    return ranks


def homology_table(complex_: GradedComplex, workers: Optional[int] = None) -> KhTable:
    """Homology ranks per slice, regraded to doubled (delta, q).

    Slices go to a process pool when more than one worker is allowed and the
    complex has at least PARALLEL_MIN_GENERATORS generators.
    """
    if complex_.perturbed:
        raise ValueError("The perturbed complex has no quantum slices; use perturbed.bn_homology_rank")
    keys = sorted(complex_.slices)
    pieces = [complex_.slices[key] for key in keys]
    count = min(Config.worker_count(workers), len(pieces))
    if count > 1 and complex_.generator_count >= PARALLEL_MIN_GENERATORS:
        with ProcessPoolExecutor(max_workers=count, initializer=Config.pin_single_worker) as pool:
            results = list(pool.map(chain_ranks, pieces))
    else:
        results = [chain_ranks(piece) for piece in pieces]
    ranks: Dict[Bigrading, int] = defaultdict(int)
    for key, by_height in zip(keys, results):
        for height, rank in by_height.items():
            ranks[calibrate(height - complex_.n_minus, key)] += rank
    return KhTable.from_ranks(ranks, complex_.component_count)


def kh_reduced(diagram: PlanarDiagram, max_crossings: Optional[int] = None,
               method: str = 'auto', workers: Optional[int] = None) -> KhTable:
    """Reduced Khovanov homology; method is 'auto', 'cube' or 'scan'."""
    n = diagram.crossing_count
    cap = max_crossings if max_crossings is not None else Config.MAX_CROSSINGS
    if n > cap:
        raise ResourceLimitError(f"Diagram has {n} crossings, limit is {cap}")
    if method == 'auto':
        method = 'cube' if n <= Config.CUBE_PREFERRED_CROSSINGS else 'scan'
    if method == 'cube':
        table = homology_table(build_reduced_complex(diagram), workers)
    elif method == 'scan':
        from scanning import scan_homology
        ranks = scan_homology(diagram, reduced=True)
        table = KhTable.from_ranks({calibrate(i, j): r for (i, j), r in ranks.items()},
                                   link_metadata(diagram).component_count)
    else:
        raise ValueError(f"Unknown method '{method}'")
    logger.info(f"Kh-tilde via {method}: {n} crossings, total rank {table.total_rank}, width {len(table.deltas)}")
    return table


# --- Derived invariants ---

def width(table: KhTable) -> int:
    """Number of delta-gradings supporting homology."""
    if table.is_empty():
        raise ValueError("Width of an empty table is undefined")
    return len(table.deltas)


def jones(table: KhTable) -> LaurentPolynomial:
    """Sum of (-1)^(delta+q) t^q over the table."""
    coefficients: Dict[int, int] = defaultdict(int)
    for grading, rank in table.entries:
        coefficients[grading.q2] += (-1) ** (grading.u % 2) * rank
    return LaurentPolynomial.from_mapping(coefficients)


def determinant(table: KhTable) -> int:
    """det from the delta-graded Euler characteristic, cross-checked against |V(-1)|."""
    if table.is_empty():
        return 0
    lowest = min(table.deltas)
    euler = sum((-1) ** (((g.delta2 - lowest) // 2) % 2) * r for g, r in table.entries)
    from_jones = jones(table).at_minus_one()
    if abs(euler) != from_jones:
        raise GradingMismatchError(f"Determinant mismatch: delta-Euler {abs(euler)} vs Jones {from_jones}")
    return abs(euler)


def _multiply(left: Mapping[int, int], right: Mapping[int, int]) -> Dict[int, int]:
    product: Dict[int, int] = defaultdict(int)
    for a, x in left.items():
        for b, y in right.items():
            product[a + b] += x * y
    return product


def kauffman_bracket_oracle(diagram: PlanarDiagram, max_crossings: Optional[int] = None) -> LaurentPolynomial:
    """Jones polynomial from the Kauffman bracket state sum, in the same t^(1/2) normalization as jones()."""
    n = diagram.crossing_count
    cap = max_crossings if max_crossings is not None else Config.ORACLE_MAX_CROSSINGS
    if n > cap:
        raise ResourceLimitError(f"State sum limited to {cap} crossings, diagram has {n}")
    cube = _Cube(diagram)
    states: Counter = Counter()
    for vertex in range(1 << n):
        b_count = bin(vertex).count('1')
        states[(n - 2 * b_count, cube.circles(vertex)[1])] += 1

    loop = {2: -1, -2: -1}
    powers = {1: {0: 1}}
    bracket: Dict[int, int] = defaultdict(int)
    for (exponent, circles), count in states.items():
        while circles not in powers:
            top = max(powers)
            powers[top + 1] = _multiply(powers[top], loop)
        for a, c in powers[circles].items():
            bracket[a + exponent] += c * count

    writhe = diagram.writhe
    sign = -1 if writhe % 2 else 1
    coefficients: Dict[int, int] = defaultdict(int)
    for a, c in bracket.items():
        if not c:
            continue
        exp2 = -(a - 3 * writhe) // 2  # A^k = t^(-k/4)
        flip = -1 if exp2 % 2 else 1
        coefficients[exp2] += sign * flip * c
    return LaurentPolynomial.from_mapping(coefficients)

"""
Braid words, their closures as planar diagrams, and diagram-level metadata.

Crossings use the PD convention: the four incident edges are listed
counterclockwise starting from the incoming under-edge, so the under strand
runs from slot 0 to slot 2 and the over strand joins slots 1 and 3. A crossing
is positive when its over strand runs from slot 3 to slot 1.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from sympy import Matrix

from validators import InputValidator, ValidationError

logger = logging.getLogger(__name__)

Letter = Tuple[int, int]
Endpoint = Tuple[int, int]  # (crossing index, slot)

MAX_FREE_ORIENTATIONS = 12


class DiagramError(ValueError):
    """Raised when planar diagram data is inconsistent."""
    pass


# --- Braid words ---

@dataclass(frozen=True)
class BraidWord:
    """A word in the Artin generators; letters are (index, sign) with index in [1, strands-1]."""
    strands: int
    letters: Tuple[Letter, ...] = ()

    def __post_init__(self):
        if self.strands < 1:
            raise ValidationError(f"Strand count must be at least 1, got {self.strands}")
        letters = tuple((int(index), int(sign)) for index, sign in self.letters)
        for index, sign in letters:
            if not 1 <= index < self.strands:
                raise ValidationError(f"Generator index {index} out of range for {self.strands} strands")
            if sign not in (1, -1):
                raise ValidationError(f"Generator sign must be +1 or -1, got {sign}")
        object.__setattr__(self, 'letters', letters)

    @classmethod
    def identity(cls, strands: int) -> 'BraidWord':
        """The empty word on the given number of strands."""
        return cls(strands)

    @classmethod
    def generator(cls, strands: int, index: int, power: int = 1) -> 'BraidWord':
        """sigma_index ** power as a word of |power| letters."""
        sign = 1 if power > 0 else -1
        return cls(strands, ((index, sign),) * abs(power))

    def __mul__(self, other: 'BraidWord') -> 'BraidWord':
        if not isinstance(other, BraidWord):
            return NotImplemented
        if other.strands != self.strands:
            raise ValidationError(f"Cannot concatenate braids on {self.strands} and {other.strands} strands")
        return BraidWord(self.strands, self.letters + other.letters)

    def __pow__(self, power: int) -> 'BraidWord':
        if power < 0:
            return self.inverse() ** (-power)
        return BraidWord(self.strands, self.letters * power)

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return self.to_text()

    def inverse(self) -> 'BraidWord':
        """Reversed word with every sign flipped."""
        return BraidWord(self.strands, tuple((index, -sign) for index, sign in reversed(self.letters)))

    def reversed(self) -> 'BraidWord':
        return BraidWord(self.strands, self.letters[::-1])

    @property
    def exponent_sum(self) -> int:
        return sum(sign for _, sign in self.letters)

    @property
    def is_positive(self) -> bool:
        return all(sign > 0 for _, sign in self.letters)

    def permutation(self) -> Tuple[int, ...]:
        """Top position (0-based) reached by the strand that starts at each bottom position."""
        strand_at = list(range(self.strands))
        for index, _ in self.letters:
            strand_at[index - 1], strand_at[index] = strand_at[index], strand_at[index - 1]
        top = [0] * self.strands
        for position, strand in enumerate(strand_at):
            top[strand] = position
        return tuple(top)

    def cycle_count(self) -> int:
        """Number of cycles of the permutation, i.e. components of the closure."""
        perm, seen, cycles = self.permutation(), set(), 0
        for start in range(self.strands):
            if start in seen:
                continue
            cycles += 1
            point = start
            while point not in seen:
                seen.add(point)
                point = perm[point]
        return cycles

    def to_text(self) -> str:
        """Canonical text form accepted by braid_from_text."""
        return f"{self.strands}:" + ''.join(f" {index * sign}" for index, sign in self.letters)


def full_twist(strands: int = 3) -> BraidWord:
    """The full twist (sigma_{n-1} ... sigma_1)^n; for three strands (s2 s1)^3."""
    row = BraidWord(strands, tuple((index, 1) for index in range(strands - 1, 0, -1)))
    return row ** strands


def braid_from_text(text: str) -> BraidWord:
    """Parse '<strands>: <i1> <i2> ...'. Raises ValidationError on malformed input."""
    strands, letters = InputValidator.parse_braid(text)
    return BraidWord(strands, tuple(letters))


# --- Planar diagrams ---

@dataclass(frozen=True)
class Crossing:
    edges: Tuple[int, int, int, int]
    sign: int

    @property
    def head_slots(self) -> Tuple[int, int]:
        """Slots whose edges point into the crossing."""
        return (0, 3) if self.sign > 0 else (0, 1)

    def smoothing(self, bit: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        """Edge pairs joined by the 0-smoothing (oriented for positive crossings) or the 1-smoothing."""
        a, b, c, d = self.edges
        return ((a, b), (c, d)) if bit == 0 else ((a, d), (b, c))

    def to_record(self) -> List[int]:
        return [*self.edges, self.sign]


@dataclass(frozen=True)
class PlanarDiagram:
    crossings: Tuple[Crossing, ...]
    basepoint: int
    free_loops: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'crossings', tuple(self.crossings))
        object.__setattr__(self, 'free_loops', tuple(self.free_loops))
        heads: Dict[int, int] = {}
        tails: Dict[int, int] = {}
        for crossing in self.crossings:
            if crossing.sign not in (1, -1):
                raise DiagramError(f"Crossing sign must be +1 or -1: {crossing}")
            for slot, edge in enumerate(crossing.edges):
                bucket = heads if slot in crossing.head_slots else tails
                bucket[edge] = bucket.get(edge, 0) + 1
        for edge in set(heads) | set(tails):
            if heads.get(edge) != 1 or tails.get(edge) != 1:
                raise DiagramError(f"Edge {edge} must enter one crossing slot and leave one")
        if set(self.free_loops) & set(heads) or len(set(self.free_loops)) != len(self.free_loops):
            raise DiagramError("Free loops must be distinct edges unused by crossings")
        if self.basepoint not in heads and self.basepoint not in self.free_loops:
            raise DiagramError(f"Basepoint {self.basepoint} is not an edge of the diagram")

    @property
    def crossing_count(self) -> int:
        return len(self.crossings)

    @property
    def n_plus(self) -> int:
        return sum(1 for crossing in self.crossings if crossing.sign > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for crossing in self.crossings if crossing.sign < 0)

    @property
    def writhe(self) -> int:
        return self.n_plus - self.n_minus

    @cached_property
    def edges(self) -> Tuple[int, ...]:
        found = {edge for crossing in self.crossings for edge in crossing.edges}
        return tuple(sorted(found | set(self.free_loops)))

    @cached_property
    def components(self) -> Tuple[Tuple[int, ...], ...]:
        """Edge cycles in orientation order, crossing components first, then free loops."""
        head_of: Dict[int, Endpoint] = {}
        for index, crossing in enumerate(self.crossings):
            for slot in crossing.head_slots:
                head_of[crossing.edges[slot]] = (index, slot)
        seen = set()
        traced = []
        for start in sorted(head_of):
            if start in seen:
                continue
            cycle, edge = [], start
            while edge not in seen:
                seen.add(edge)
                cycle.append(edge)
                index, slot = head_of[edge]
                edge = self.crossings[index].edges[(slot + 2) % 4]
            traced.append(tuple(cycle))
        return tuple(traced) + tuple((loop,) for loop in self.free_loops)

    def with_basepoint(self, edge: int) -> 'PlanarDiagram':
        return PlanarDiagram(self.crossings, edge, self.free_loops)

    def to_json(self) -> Dict:
        return {
            'crossings': [crossing.to_record() for crossing in self.crossings],
            'basepoint': self.basepoint,
            'free_loops': list(self.free_loops),
        }

    @classmethod
    def from_json(cls, data) -> 'PlanarDiagram':
        if isinstance(data, str):
            data = json.loads(data)
        try:
            crossings = tuple(Crossing(tuple(record[:4]), record[4]) for record in data['crossings'])
            return cls(crossings, data['basepoint'], tuple(data.get('free_loops', ())))
        except (KeyError, IndexError, TypeError) as e:
            raise DiagramError(f"Malformed diagram JSON: {e}")


@dataclass(frozen=True)
class LinkMetadata:
    component_count: int
    linking: Tuple[Tuple[int, ...], ...]
    writhe: int
    n_plus: int
    n_minus: int

    def to_json(self) -> Dict:
        return {
            'components': self.component_count,
            'linking': [list(row) for row in self.linking],
            'writhe': self.writhe,
            'n_plus': self.n_plus,
            'n_minus': self.n_minus,
        }


def link_metadata(diagram: PlanarDiagram) -> LinkMetadata:
    """Components by edge tracing, linking numbers from signed inter-component crossings."""
    component_of = {}
    for number, cycle in enumerate(diagram.components):
        for edge in cycle:
            component_of[edge] = number
    k = len(diagram.components)
    doubled = [[0] * k for _ in range(k)]
    for crossing in diagram.crossings:
        under, over = component_of[crossing.edges[0]], component_of[crossing.edges[1]]
        if under != over:
            doubled[under][over] += crossing.sign
            doubled[over][under] += crossing.sign
    if any(value % 2 for row in doubled for value in row):
        raise DiagramError("Odd signed crossing count between two components")
    linking = tuple(tuple(value // 2 for value in row) for row in doubled)
    return LinkMetadata(k, linking, diagram.writhe, diagram.n_plus, diagram.n_minus)


# --- Building and orienting diagrams ---

def _endpoints(slots: Sequence[Sequence[int]]) -> Dict[int, List[Endpoint]]:
    ends: Dict[int, List[Endpoint]] = {}
    for index, crossing in enumerate(slots):
        for slot, edge in enumerate(crossing):
            ends.setdefault(edge, []).append((index, slot))
    for edge, points in ends.items():
        if len(points) != 2:
            raise DiagramError(f"Edge {edge} occurs {len(points)} times; expected 2")
    return ends


def _trace(slots: Sequence[Sequence[int]], ends: Dict[int, List[Endpoint]]) -> List[List[Endpoint]]:
    """Components as lists of entering endpoints, each traced from its smallest endpoint."""
    seen = set()
    components = []
    for start in sorted(point for points in ends.values() for point in points):
        if start in seen:
            continue
        cycle, point = [], start
        while True:
            cycle.append(point)
            index, slot = point
            exit_point = (index, (slot + 2) % 4)
            seen.update((point, exit_point))
            first, second = ends[slots[index][exit_point[1]]]
            point = second if first == exit_point else first
            if point == start:
                break
        components.append(cycle)
    return components


def _heads(component: List[Endpoint], flipped: bool) -> List[Endpoint]:
    if not flipped:
        return component
    return [(index, (slot + 2) % 4) for index, slot in component]


def _assemble(slots: Sequence[Sequence[int]], heads: set) -> List[Crossing]:
    crossings = []
    for index, edges in enumerate(slots):
        rotated = (index, 2) in heads
        ordered = (edges[2], edges[3], edges[0], edges[1]) if rotated else tuple(edges)
        over_head = 1 if (index, 1) in heads else 3
        positive = over_head == (1 if rotated else 3)
        crossings.append(Crossing(ordered, 1 if positive else -1))
    return crossings


def _choose_flips(slots, components, hints: Mapping[Endpoint, bool]) -> List[bool]:
    """Keep hinted orientations where consistent; pick the rest to minimise negative crossings."""
    flips: List[bool] = []
    free: List[int] = []
    for number, component in enumerate(components):
        hinted = [hints[point] for point in component if point in hints]
        opposite = [(index, (slot + 2) % 4) for index, slot in component]
        hinted_exits = [not hints[point] for point in opposite if point in hints]
        votes = hinted + hinted_exits
        if all(votes):
            flips.append(False)
        elif not any(votes):
            flips.append(True)
        else:
            flips.append(False)
            free.append(number)
    if not free:
        return flips
    if len(free) > MAX_FREE_ORIENTATIONS:
        raise DiagramError(f"Too many components ({len(free)}) need an orientation choice")

    best, best_minus = None, None
    for choice in product((False, True), repeat=len(free)):
        trial = list(flips)
        for number, flipped in zip(free, choice):
            trial[number] = flipped
        heads = {point for number, component in enumerate(components)
                 for point in _heads(component, trial[number])}
        minus = sum(1 for crossing in _assemble(slots, heads) if crossing.sign < 0)
        if best_minus is None or minus < best_minus:
            best, best_minus = trial, minus
    return best


class DiagramBuilder:
    """Accumulates unoriented crossings and edge identifications, then orients and numbers them.

    A crossing is given by its four edges counterclockwise with the under strand
    on slots 0 and 2. Optional head hints record the intended direction of each
    slot; components whose hints agree keep that direction, the others get the
    orientation with the fewest negative crossings.
    """

    def __init__(self):
        self._slots: List[List[int]] = []
        self._hints: Dict[Endpoint, bool] = {}
        self._parent: Dict[int, int] = {}
        self._next_edge = 1

    def new_edge(self) -> int:
        edge = self._next_edge
        self._next_edge += 1
        self._parent[edge] = edge
        return edge

    def register_edge(self, edge: int) -> int:
        self._parent.setdefault(edge, edge)
        self._next_edge = max(self._next_edge, edge + 1)
        return edge

    def find(self, edge: int) -> int:
        while self._parent[edge] != edge:
            self._parent[edge] = self._parent[self._parent[edge]]
            edge = self._parent[edge]
        return edge

    def identify(self, first: int, second: int):
        """Join two edge ids into one edge; the smaller id survives."""
        a, b = self.find(first), self.find(second)
        if a != b:
            self._parent[max(a, b)] = min(a, b)

    def add_crossing(self, edges: Sequence[int], heads: Optional[Iterable[int]] = None) -> int:
        index = len(self._slots)
        self._slots.append(list(edges))
        if heads is not None:
            heads = set(heads)
            for slot in range(4):
                self._hints[(index, slot)] = slot in heads
        return index

    def add_braid_letter(self, left: int, right: int, sign: int, hinted: bool = True) -> Tuple[int, int]:
        """Cross the upward strands on edges left and right; returns the new (left, right) edges."""
        left_out, right_out = self.new_edge(), self.new_edge()
        if sign > 0:
            self.add_crossing((right, right_out, left_out, left), (0, 3) if hinted else None)
        else:
            self.add_crossing((left, right, right_out, left_out), (0, 1) if hinted else None)
        return left_out, right_out

    def add_side_twist(self, top: int, bottom: int, handedness: int) -> Tuple[int, int]:
        """Twist the two right-hand ends of a tangle; returns the new (top, bottom) ends."""
        top_out, bottom_out = self.new_edge(), self.new_edge()
        if handedness > 0:
            self.add_crossing((bottom_out, top_out, top, bottom))
        else:
            self.add_crossing((bottom, bottom_out, top_out, top))
        return top_out, bottom_out

    def build(self, basepoint: int) -> PlanarDiagram:
        slots = [[self.find(edge) for edge in crossing] for crossing in self._slots]
        ends = _endpoints(slots)
        roots = sorted({self.find(edge) for edge in self._parent})
        loops = [edge for edge in roots if edge not in ends]
        components = _trace(slots, ends)
        flips = _choose_flips(slots, components, self._hints)

        basepoint = self.find(basepoint)
        order: List[List[int]] = []
        for component, flipped in zip(components, flips):
            sequence = [slots[index][slot] for index, slot in component]
            if flipped:
                sequence = [slots[index][(slot + 2) % 4] for index, slot in reversed(component)]
            anchor = basepoint if basepoint in sequence else min(sequence)
            at = sequence.index(anchor)
            order.append(sequence[at:] + sequence[:at])
        order.sort(key=lambda sequence: (sequence[0] != basepoint, sequence[0]))
        loops.sort(key=lambda edge: (edge != basepoint, edge))
        if basepoint in loops:
            order.insert(0, [basepoint])
            loops.remove(basepoint)

        renumber: Dict[int, int] = {}
        for edge in [edge for sequence in order for edge in sequence] + loops:
            renumber[edge] = len(renumber) + 1

        heads = {point for component, flipped in zip(components, flips) for point in _heads(component, flipped)}
        crossings = tuple(
            Crossing(tuple(renumber[edge] for edge in crossing.edges), crossing.sign)
            for crossing in _assemble(slots, heads)
        )
        free = tuple(renumber[edge] for edge in loops)
        if order and order[0] == [basepoint] and basepoint not in ends:
            free = (renumber[basepoint],) + free
        return PlanarDiagram(crossings, renumber[basepoint], tuple(sorted(free)))


def closure(braid: BraidWord) -> PlanarDiagram:
    """Braid closure; crossing k is letter k, the basepoint is the closure arc of strand 1 (edge 1)."""
    builder = DiagramBuilder()
    current = [builder.new_edge() for _ in range(braid.strands)]
    for index, sign in braid.letters:
        i = index - 1
        current[i], current[i + 1] = builder.add_braid_letter(current[i], current[i + 1], sign)
    for position, edge in enumerate(current):
        builder.identify(position + 1, edge)
    diagram = builder.build(1)
    logger.debug(f"Closed {braid} into {diagram.crossing_count} crossings")
    return diagram


def resolve(diagram: PlanarDiagram, smoothings: Mapping[int, int]) -> PlanarDiagram:
    """Replace the given crossings by their 0- or 1-smoothings.

    Remaining crossings keep their relative order. Components untouched by the
    smoothings keep their orientation; the others are oriented to minimise n-.
    """
    for crossing in smoothings:
        if not 0 <= crossing < diagram.crossing_count:
            raise DiagramError(f"Crossing id {crossing} out of range")
    builder = DiagramBuilder()
    for edge in diagram.edges:
        builder.register_edge(edge)
    for index, crossing in enumerate(diagram.crossings):
        if index in smoothings:
            for first, second in crossing.smoothing(smoothings[index]):
                builder.identify(first, second)
        else:
            builder.add_crossing(crossing.edges, crossing.head_slots)
    return builder.build(diagram.basepoint)


def coloring_determinant(diagram: PlanarDiagram) -> int:
    """Link determinant from a minor of the Fox colouring matrix, computed exactly."""
    n = diagram.crossing_count
    if n == 0:
        return 1 if len(diagram.free_loops) == 1 else 0
    if diagram.free_loops:
        return 0
    arc = {edge: edge for edge in diagram.edges}

    def find(edge):
        while arc[edge] != edge:
            arc[edge] = arc[arc[edge]]
            edge = arc[edge]
        return edge

    for crossing in diagram.crossings:
        arc[find(crossing.edges[1])] = find(crossing.edges[3])
    arcs = sorted({find(edge) for edge in diagram.edges})
    if len(arcs) != n:
        # some component never passes under: the diagram is split
        return 0
    column = {root: position for position, root in enumerate(arcs)}
    rows = []
    for crossing in diagram.crossings:
        row = [0] * n
        row[column[find(crossing.edges[1])]] += 2
        row[column[find(crossing.edges[0])]] -= 1
        row[column[find(crossing.edges[2])]] -= 1
        rows.append(row)
    if n == 1:
        return 1
    minor = Matrix([row[:-1] for row in rows[:-1]])
    return abs(int(minor.det(method='bareiss')))

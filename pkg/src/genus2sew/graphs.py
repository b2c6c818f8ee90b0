"""Chequered cycles and necklaces.

A chequered cycle is a clockwise-oriented polygon with 2n nodes labeled by
positive integers and edge labels alternating between 1 and 2; a chequered
necklace is the open (two valence-one ends) variant, optionally with
marked ends carrying torus points.  The edge weights

    k --a--> l            A_a(k, l)
    (1,x) --a--> k        sqrt(k) eps^{k/2} P_{k+1}(tau_a, x)
    (1,x) --a--> (1,y)    P_2(tau_a, x - y)

turn enumeration into the combinatorial route to det(I - A1 A2), the
resolvent entry, the period matrix, omega2 and nu: everything the sewing
module computes by linear algebra is recovered here as graded sums and
products over graphs, and the two routes cross-check each other.

Cycle classes are kept up to rotation only (the orientation is fixed);
a rotation by an odd number of steps flips every edge parity, so the
canonical form tracks the parity phase alongside the label sequence.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import DomainError
from .series import DEFAULT_ORDER, elliptic_P_fourier
from .sewing import SewingPoint, SheetPoint, a_matrix, validate_sheet_point

DEFAULT_DEGREE = 10


# -- cycles ------------------------------------------------------------------

@dataclass(frozen=True)
class ChequeredCycle:
    """Cycle with node labels and the parity of the edge leaving node 0.

    Edge i runs from node i to node i+1 (mod 2n) and has parity
    first_parity when i is even.  The stored presentation is canonical:
    minimal over all rotations, with odd rotations flipping the phase.
    """
    labels: tuple
    first_parity: int

    def __post_init__(self):
        if len(self.labels) % 2 or not self.labels:
            raise ValueError("chequered cycles have an even number of nodes")
        if self.first_parity not in (1, 2):
            raise ValueError("parity must be 1 or 2")

    @property
    def degree(self) -> int:
        """Total eps-exponent of the weight: the label sum."""
        return sum(self.labels)

    def edge_parity(self, i: int) -> int:
        return self.first_parity if i % 2 == 0 else 3 - self.first_parity

    def presentations(self):
        n = len(self.labels)
        for s in range(n):
            labels = self.labels[s:] + self.labels[:s]
            phase = self.first_parity if s % 2 == 0 else 3 - self.first_parity
            yield phase, labels

    def canonical(self) -> "ChequeredCycle":
        phase, labels = min(self.presentations())
        return ChequeredCycle(labels, phase)

    def distinguished_nodes(self):
        """Nodes of label 1 whose in-edge has parity 2 and out-edge parity 1.

        Since parities alternate, this is: label 1 and out-edge parity 1.
        """
        return [i for i, lab in enumerate(self.labels)
                if lab == 1 and self.edge_parity(i) == 1]


def rotation_group_order(cycle: ChequeredCycle) -> int:
    """Order of the label-and-parity-preserving rotation subgroup.

    Only even-step rotations can preserve the alternating parities.
    """
    n = len(cycle.labels)
    count = 0
    for s in range(0, n, 2):
        if all(cycle.labels[(i + s) % n] == cycle.labels[i] for i in range(n)):
            count += 1
    return count


def _bounded_tuples(length: int, budget: int):
    """All tuples of positive integers of given length with sum <= budget."""
    if length == 0:
        yield ()
        return
    for first in range(1, budget - length + 2):
        for rest in _bounded_tuples(length - 1, budget - first):
            yield (first,) + rest


def enumerate_cycles(max_degree: int):
    """One canonical representative per isomorphism class of chequered
    cycles of degree <= max_degree."""
    out = []
    for n in range(2, max_degree + 1, 2):
        for labels in _bounded_tuples(n, max_degree):
            for phase in (1, 2):
                c = ChequeredCycle(labels, phase)
                if (phase, labels) == min(c.presentations()):
                    out.append(c)
    return out


def enumerate_cycles_naive(max_degree: int):
    """Independent generator: list every presentation, then quotient by
    rotations.  Returns {canonical cycle: orbit size} for cross-checking."""
    orbit = {}
    for n in range(2, max_degree + 1, 2):
        for labels in _bounded_tuples(n, max_degree):
            for phase in (1, 2):
                c = ChequeredCycle(labels, phase).canonical()
                orbit[c] = orbit.get(c, 0) + 1
    return orbit


def enumerate_rotationless_cycles(max_degree: int):
    """The set R: canonical representatives with trivial rotation group."""
    return [c for c in enumerate_cycles(max_degree)
            if rotation_group_order(c) == 1]


def enumerate_R21_L21(max_degree: int):
    """R21: rotationless cycles with a distinguished node.
    L21: all cycle classes with a unique distinguished node."""
    cycles = enumerate_cycles(max_degree)
    r21 = [c for c in cycles
           if rotation_group_order(c) == 1 and c.distinguished_nodes()]
    l21 = [c for c in cycles if len(c.distinguished_nodes()) == 1]
    return r21, l21


# -- necklaces ---------------------------------------------------------------

@dataclass(frozen=True)
class ChequeredNecklace:
    """Open chequered graph, read left to right.

    Plain ends are valence-one nodes labeled 1 (left_end/right_end None);
    marked ends carry a SheetPoint.  The degenerate necklace (single node,
    no edges) is ChequeredNecklace((), None, None, None) with weight 1.
    """
    interior_labels: tuple
    first_parity: int | None
    left_end: SheetPoint | None = None
    right_end: SheetPoint | None = None

    @property
    def is_degenerate(self) -> bool:
        return self.first_parity is None

    @property
    def n_edges(self) -> int:
        return 0 if self.is_degenerate else len(self.interior_labels) + 1

    def edge_parity(self, i: int) -> int:
        return self.first_parity if i % 2 == 0 else 3 - self.first_parity

    @property
    def last_parity(self) -> int | None:
        if self.is_degenerate:
            return None
        return self.edge_parity(self.n_edges - 1)

    @property
    def degree(self):
        """Total eps-exponent of the weight (half-integer for one marked
        end, integer otherwise)."""
        if self.is_degenerate:
            return 0
        total = sum(self.interior_labels)
        if self.left_end is None:
            total += 0.5
        if self.right_end is None:
            total += 0.5
        return total


DEGENERATE_NECKLACE = ChequeredNecklace((), None, None, None)


def _marked_edge_weight(k: int, x: SheetPoint, point: SewingPoint,
                        order: int) -> complex:
    """Weight sqrt(k) eps^{k/2} P_{k+1}(tau_sheet, x) of a marked edge."""
    mod = point.modulus(x.sheet)
    return (math.sqrt(k) * point.sqrt_eps ** k
            * elliptic_P_fourier(k + 1, mod, x.z, order))


def zeta_weight(graph, point: SewingPoint, order: int = DEFAULT_ORDER,
                _mats=None) -> complex:
    """Product of edge weights of a cycle or necklace."""
    if _mats is None:
        K = max(_graph_label_max(graph), 2)
        _mats = (a_matrix(1, point, K, order), a_matrix(2, point, K, order))

    def A(parity, k, l):
        return _mats[parity - 1][k - 1, l - 1]

    if isinstance(graph, ChequeredCycle):
        n = len(graph.labels)
        w = 1.0 + 0j
        for i in range(n):
            w *= A(graph.edge_parity(i), graph.labels[i],
                   graph.labels[(i + 1) % n])
        return w

    if isinstance(graph, ChequeredNecklace):
        if graph.is_degenerate:
            return 1.0 + 0j
        for end, pos in ((graph.left_end, 0),
                         (graph.right_end, graph.n_edges - 1)):
            if end is not None and end.sheet != graph.edge_parity(pos):
                raise DomainError("marked end sheet must match the parity "
                                  "of its abutting edge")
        seq = graph.interior_labels
        if not seq:
            if graph.left_end is None and graph.right_end is None:
                return A(graph.first_parity, 1, 1)
            if graph.left_end is None or graph.right_end is None:
                x = graph.left_end or graph.right_end
                return _marked_edge_weight(1, x, point, order)
            mod = point.modulus(graph.first_parity)
            return elliptic_P_fourier(
                2, mod, graph.left_end.z - graph.right_end.z, order)
        w = 1.0 + 0j
        if graph.left_end is None:
            w *= A(graph.edge_parity(0), 1, seq[0])
        else:
            w *= _marked_edge_weight(seq[0], graph.left_end, point, order)
        for i in range(len(seq) - 1):
            w *= A(graph.edge_parity(i + 1), seq[i], seq[i + 1])
        last = graph.n_edges - 1
        if graph.right_end is None:
            w *= A(graph.edge_parity(last), seq[-1], 1)
        else:
            w *= _marked_edge_weight(seq[-1], graph.right_end, point, order)
        return w

    raise TypeError(f"unknown graph type {type(graph)!r}")


def _graph_label_max(graph) -> int:
    if isinstance(graph, ChequeredCycle):
        return max(graph.labels)
    if graph.is_degenerate or not graph.interior_labels:
        return 1
    return max(graph.interior_labels)


def plain_necklaces(a: int, b: int, max_degree: int):
    """Oriented necklaces of type ab (first edge parity a, last parity b)
    with both ends plain, degree <= max_degree.  The degenerate necklace
    belongs to the mixed classes a != b."""
    out = []
    if a != b:
        out.append(DEGENERATE_NECKLACE)
    # m interior nodes -> m+1 edges; parity alternation forces the edge
    # count parity: last = a needs odd count, last = b != a even count
    for m in range(0, max_degree):
        edges = m + 1
        last = a if edges % 2 == 1 else 3 - a
        if last != b:
            continue
        for seq in _bounded_tuples(m, max_degree - 1):
            out.append(ChequeredNecklace(seq, a))
    return out


def marked_necklaces(x: SheetPoint, y: SheetPoint, max_degree: int):
    """Necklaces with both ends marked: (1,x) -> ... -> (1,y)."""
    a, b = x.sheet, y.sheet
    out = []
    if a == b:
        out.append(ChequeredNecklace((), a, x, y))
    for m in range(1, max_degree + 1):
        edges = m + 1
        last = a if edges % 2 == 1 else 3 - a
        if last != b:
            continue
        for seq in _bounded_tuples(m, max_degree):
            out.append(ChequeredNecklace(seq, a, x, y))
    return out


def half_marked_necklaces(x: SheetPoint, last_parity: int, max_degree: int):
    """Necklaces (1,x) -> ... -> plain 1 with the given final edge parity."""
    a = x.sheet
    out = []
    for m in range(0, max_degree + 1):
        edges = m + 1
        last = a if edges % 2 == 1 else 3 - a
        if last != last_parity:
            continue
        if m == 0:
            out.append(ChequeredNecklace((), a, x, None))
        else:
            for seq in _bounded_tuples(m, max_degree - 1):
                out.append(ChequeredNecklace(seq, a, x, None))
    return out


def zeta_ab(a: int, b: int, point: SewingPoint,
            max_degree: int = DEFAULT_DEGREE,
            order: int = DEFAULT_ORDER) -> complex:
    """Graded necklace sum zeta_ab = sum over type-ab necklaces."""
    K = max(max_degree, 2)
    mats = (a_matrix(1, point, K, order), a_matrix(2, point, K, order))
    return sum(zeta_weight(n, point, order, mats)
               for n in plain_necklaces(a, b, max_degree))


def period_matrix_graph(point: SewingPoint,
                        max_degree: int = DEFAULT_DEGREE):
    """Period matrix from the necklace expansion:

        Om_aa = tau_a + (eps/2 pi i) zeta_{abar,abar}
        Om_12 = -(eps/2 pi i) zeta_21
    """
    f = point.eps / (2j * math.pi)
    om11 = point.tau1.tau + f * zeta_ab(2, 2, point, max_degree)
    om22 = point.tau2.tau + f * zeta_ab(1, 1, point, max_degree)
    om12 = -f * zeta_ab(2, 1, point, max_degree)
    return np.array([[om11, om12], [om12, om22]])


def omega2_graph(x: SheetPoint, y: SheetPoint, point: SewingPoint,
                 max_degree: int = DEFAULT_DEGREE,
                 order: int = DEFAULT_ORDER) -> complex:
    """Bilinear form from the marked-necklace expansion."""
    validate_sheet_point(x, point)
    validate_sheet_point(y, point)
    K = max(max_degree, 2)
    mats = (a_matrix(1, point, K, order), a_matrix(2, point, K, order))
    total = sum(zeta_weight(n, point, order, mats)
                for n in marked_necklaces(x, y, max_degree))
    return total if x.sheet == y.sheet else -total


def nu_graph(i: int, x: SheetPoint, point: SewingPoint,
             max_degree: int = DEFAULT_DEGREE,
             order: int = DEFAULT_ORDER) -> complex:
    """One-form nu_i from the marked-necklace expansion; the plain end is
    always attached by an edge of parity ibar."""
    validate_sheet_point(x, point)
    K = max(max_degree, 2)
    mats = (a_matrix(1, point, K, order), a_matrix(2, point, K, order))
    total = sum(zeta_weight(n, point, order, mats)
                for n in half_marked_necklaces(x, 3 - i, max_degree))
    if x.sheet == i:
        return 1.0 + point.sqrt_eps * total
    return -point.sqrt_eps * total


def product_det(point: SewingPoint, max_degree: int = DEFAULT_DEGREE,
                order: int = DEFAULT_ORDER) -> complex:
    """prod over rotationless cycles of (1 - zeta(N)), the graded product
    form of det(I - A1 A2)."""
    K = max(max_degree, 2)
    mats = (a_matrix(1, point, K, order), a_matrix(2, point, K, order))
    out = 1.0 + 0j
    for c in enumerate_rotationless_cycles(max_degree):
        out *= 1.0 - zeta_weight(c, point, order, mats)
    return out


def product_zeta12_resolvent(point: SewingPoint,
                             max_degree: int = DEFAULT_DEGREE,
                             order: int = DEFAULT_ORDER) -> complex:
    """prod over R21 of (1 - zeta(L))^{-1}; equals the resolvent (1,1)
    entry to the truncation order."""
    K = max(max_degree, 2)
    mats = (a_matrix(1, point, K, order), a_matrix(2, point, K, order))
    r21, _ = enumerate_R21_L21(max_degree)
    out = 1.0 + 0j
    for c in r21:
        out /= 1.0 - zeta_weight(c, point, order, mats)
    return out


def l21_sum_resolvent(point: SewingPoint,
                      max_degree: int = DEFAULT_DEGREE,
                      order: int = DEFAULT_ORDER) -> complex:
    """(1 - sum over L21 of zeta(L))^{-1}, the second resolvent identity."""
    K = max(max_degree, 2)
    mats = (a_matrix(1, point, K, order), a_matrix(2, point, K, order))
    _, l21 = enumerate_R21_L21(max_degree)
    return 1.0 / (1.0 - sum(zeta_weight(c, point, order, mats) for c in l21))


def dump_cycle_classes_csv(path, point: SewingPoint,
                           max_degree: int = DEFAULT_DEGREE) -> int:
    """Audit dump of the enumerated cycle classes; returns the row count."""
    K = max(max_degree, 2)
    mats = (a_matrix(1, point, K), a_matrix(2, point, K))
    rows = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["degree", "labels", "first_parity", "rotationless",
                         "weight_re", "weight_im"])
        for c in enumerate_cycles(max_degree):
            w = zeta_weight(c, point, _mats=mats)
            writer.writerow([c.degree,
                             " ".join(str(l) for l in c.labels),
                             c.first_parity,
                             int(rotation_group_order(c) == 1),
                             f"{w.real:.17g}", f"{w.imag:.17g}"])
            rows += 1
    return rows


# -- reduced forms and label classes (the product-formula bookkeeping) -------

def _word_reduced(word):
    """Express a cyclic word as (canonical rotationless base, power)."""
    n = len(word)
    period = n
    for p in range(1, n + 1):
        if n % p == 0 and word == word[p:] + word[:p]:
            period = p
            break
    base = word[:period]
    canon = min(base[s:] + base[:s] for s in range(period))
    return canon, n // period


def reduced_F_form(perm, labeling):
    """Reduced form of a permutation under a labeling map.

    perm maps index -> index (tuple or dict) on range(len(labeling));
    labeling maps index -> label.  Each cycle of perm becomes a power of a
    canonical rotationless label word; the result maps each base word to
    its total exponent.
    """
    n = len(labeling)
    seen = [False] * n
    out = {}
    for start in range(n):
        if seen[start]:
            continue
        cyc = []
        i = start
        while not seen[i]:
            seen[i] = True
            cyc.append(labeling[i])
            i = perm[i]
        base, power = _word_reduced(tuple(cyc))
        out[base] = out.get(base, 0) + power
    return out


def count_F_classes(multiplicities) -> int:
    """Brute-force check that equal-reduced-form classes in the symmetric
    group all have size prod(s_i); returns the number of classes."""
    labeling = []
    for label, s in enumerate(multiplicities):
        labeling.extend([label] * s)
    t = len(labeling)
    classes = {}
    for perm in permutations(range(t)):
        key = frozenset(reduced_F_form(perm, labeling).items())
        classes[key] = classes.get(key, 0) + 1
    expected = math.prod(multiplicities)
    for size in classes.values():
        if size != expected:
            raise AssertionError(
                f"class of size {size}, expected {expected}")
    if len(classes) * expected != math.factorial(t):
        raise AssertionError("class count inconsistent with |T|!/prod s_i")
    return len(classes)

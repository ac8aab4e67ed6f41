"""Minimal subsets of a finite group containing a left coset of every cyclic subgroup.

Groups are multiplication tables over element indices 0..m-1.  Subsets of
the group are Python ints used as bitmasks (bit i set <=> element i present),
so unions and containment tests are single integer operations.

The exact solver is a depth-first branch and bound with one variable per
cyclic subgroup (which left coset to include).  Two reductions keep the
variable list short:

* a cyclic subgroup contained in a larger cyclic subgroup is implied by it
  (a coset of the larger one contains a coset of the smaller one), so only
  maximal cyclic subgroups become variables;
* left translation maps covers to covers, so the first variable can be
  pinned to the coset through the identity while proving the optimum value.

Ties between optimal covers are broken towards the lexicographically
smallest sorted index tuple with a sequence of constrained feasibility
searches.
"""
from __future__ import annotations

import itertools
import math
import re
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

MAX_TABLE_ORDER = 4096
FULL_ASSOCIATIVITY_ORDER = 64
ASSOCIATIVITY_SAMPLES = 100_000
ORACLE_LIMIT = 10 ** 7
DEFAULT_BUDGET_MS = 60_000


class GroupSpecError(ValueError):
    """Unparseable group spec or a table that is not a group."""


class OracleLimitError(ValueError):
    """The exhaustive product over coset choices exceeds the oracle limit."""


def mask_of(elements: Iterable[int]) -> int:
    m = 0
    for x in elements:
        m |= 1 << int(x)
    return m


def elements_of(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


# ---------------------------------------------------------------------------
# groups
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class FiniteGroup:
    table: np.ndarray
    labels: list[str]
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.table = np.asarray(self.table, dtype=np.int64)
        m = self.table.shape[0]
        if self.table.shape != (m, m) or m == 0:
            raise GroupSpecError("multiplication table must be a nonempty square array")
        if len(self.labels) != m:
            raise GroupSpecError("one label per element is required")
        self.validate()

    @property
    def order(self) -> int:
        return self.table.shape[0]

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def validate(self, rng: np.random.Generator | None = None) -> None:
        T, m = self.table, self.order
        if T.min() < 0 or T.max() >= m:
            raise GroupSpecError("table entries out of range")
        full = np.arange(m)
        if not (np.all(np.sort(T, axis=1) == full) and np.all(np.sort(T, axis=0) == full[:, None])):
            raise GroupSpecError("table is not a Latin square")
        ids = [e for e in range(m) if np.array_equal(T[e], full) and np.array_equal(T[:, e], full)]
        if not ids:
            raise GroupSpecError("no two-sided identity")
        self.identity = ids[0]
        inv = np.argmax(T == self.identity, axis=1)
        if not np.all(T[inv, full] == self.identity):
            raise GroupSpecError("left and right inverses differ")
        self.inverse = inv
        if m <= FULL_ASSOCIATIVITY_ORDER:
            left = T[T[:, :, None], full[None, None, :]]     # (ab)c
            right = T[full[:, None, None], T[None, :, :]]    # a(bc)
            ok = np.array_equal(left, right)
        else:
            rng = rng or np.random.default_rng(0)
            a, b, c = rng.integers(0, m, size=(3, ASSOCIATIVITY_SAMPLES))
            ok = np.array_equal(T[T[a, b], c], T[a, T[b, c]])
        if not ok:
            raise GroupSpecError("table is not associative")

    def power(self, g: int, k: int) -> int:
        x = self.identity
        for _ in range(k):
            x = int(self.table[x, g])
        return x

    def cyclic(self, g: int) -> list[int]:
        out = [self.identity]
        x = g
        while x != self.identity:
            out.append(x)
            x = int(self.table[x, g])
        return out

    def element_order(self, g: int) -> int:
        return len(self.cyclic(g))

    @property
    def exponent(self) -> int:
        return math.lcm(*(self.element_order(g) for g in range(self.order)))

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def left_translate(self, g: int, mask: int) -> int:
        return mask_of(int(self.table[g, x]) for x in elements_of(mask))

    def left_cosets(self, subgroup: Sequence[int]) -> list[int]:
        """Distinct left cosets gH as bitmasks, ordered by smallest element."""
        H = np.asarray(subgroup)
        seen: set[int] = set()
        out = []
        for g in range(self.order):
            c = mask_of(self.table[g, H])
            if c not in seen:
                seen.add(c)
                out.append(c)
        return out

    def generated(self, gens: Iterable[int]) -> int:
        """Bitmask of the subgroup generated by ``gens``."""
        elems = {self.identity}
        frontier = [self.identity]
        gens = list(gens)
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = int(self.table[x, g])
                    if y not in elems:
                        elems.add(y)
                        nxt.append(y)
            frontier = nxt
        return mask_of(elems)

    def to_dict(self) -> dict:
        return {"name": self.name, "order": self.order, "labels": self.labels,
                "table": self.table.tolist(), "meta": self.meta}


def group_from_operation(elements: Sequence[Hashable], op: Callable, name: str,
                         label: Callable[[Hashable], str] = str, meta: dict | None = None) -> FiniteGroup:
    index = {x: i for i, x in enumerate(elements)}
    m = len(elements)
    if m > MAX_TABLE_ORDER:
        raise GroupSpecError(f"order {m} exceeds the table limit {MAX_TABLE_ORDER}")
    table = np.empty((m, m), dtype=np.int64)
    for i, a in enumerate(elements):
        for j, b in enumerate(elements):
            try:
                table[i, j] = index[op(a, b)]
            except KeyError:
                raise GroupSpecError(f"{name}: operation is not closed") from None
    return FiniteGroup(table, [label(x) for x in elements], name, meta or {})


def cyclic_group(m: int) -> FiniteGroup:
    return group_from_operation(list(range(m)), lambda a, b: (a + b) % m, f"Z{m}",
                                meta={"kind": "cyclic", "generators": [1 % m]})


def dihedral_group(m: int) -> FiniteGroup:
    """Symmetries of the m-gon, order 2m: (k, f) stands for r^k s^f."""
    elems = [(k, f) for f in (0, 1) for k in range(m)]

    def op(a, b):
        (k1, f1), (k2, f2) = a, b
        return ((k1 + (-k2 if f1 else k2)) % m, f1 ^ f2)

    def label(x):
        return f"r{x[0]}" + ("s" if x[1] else "")

    return group_from_operation(elems, op, f"D{m}", label, {"kind": "dihedral", "n": m})


def symmetric_group(n: int, even_only: bool = False) -> FiniteGroup:
    def sign(p):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])
        return inversions % 2

    elems = [p for p in itertools.permutations(range(n)) if not even_only or sign(p) == 0]

    def op(a, b):  # (a b)(i) = a(b(i))
        return tuple(a[i] for i in b)

    name = f"A{n}" if even_only else f"S{n}"
    return group_from_operation(elems, op, name, lambda p: "".join(map(str, p)),
                                {"kind": "alternating" if even_only else "symmetric", "n": n})


def quaternion_group() -> FiniteGroup:
    """Q8 as unit quaternions (s, idx) = s * basis[idx] with basis 1, i, j, k."""
    mult = {(0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
            (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
            (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
            (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0)}
    elems = [(s, b) for s in (1, -1) for b in range(4)]

    def op(a, b):
        s, c = mult[(a[1], b[1])]
        return (a[0] * b[0] * s, c)

    def label(x):
        return ("-" if x[0] < 0 else "") + "1ijk"[x[1]]

    return group_from_operation(elems, op, "Q8", label, {"kind": "quaternion"})


def unitriangular_group(p: int) -> FiniteGroup:
    """Upper unitriangular 3x3 matrices over Z_p; (a, b, c) is [[1,a,c],[0,1,b],[0,0,1]]."""
    elems = list(itertools.product(range(p), repeat=3))

    def op(x, y):
        return ((x[0] + y[0]) % p, (x[1] + y[1]) % p, (x[2] + y[2] + x[0] * y[1]) % p)

    return group_from_operation(elems, op, f"UT3({p})", lambda x: "".join(map(str, x)),
                                {"kind": "unitriangular", "p": p})


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    m, n = G.order, H.order
    if m * n > MAX_TABLE_ORDER:
        raise GroupSpecError(f"order {m * n} exceeds the table limit {MAX_TABLE_ORDER}")
    gi = np.repeat(np.arange(m), n)
    hi = np.tile(np.arange(n), m)
    table = G.table[gi[:, None], gi[None, :]] * n + H.table[hi[:, None], hi[None, :]]
    labels = [f"({G.labels[a]},{H.labels[b]})" for a, b in zip(gi, hi)]
    return FiniteGroup(table, labels, f"{G.name}x{H.name}", {"kind": "product", "factors": [G.name, H.name]})


def table_group(table, labels: Sequence[str] | None = None, name: str = "table") -> FiniteGroup:
    table = np.asarray(table, dtype=np.int64)
    if table.ndim != 2 or table.shape[0] > MAX_TABLE_ORDER:
        raise GroupSpecError("explicit table must be square with order <= 4096")
    labels = list(labels) if labels is not None else [str(i) for i in range(table.shape[0])]
    return FiniteGroup(table, labels, name, {"kind": "table"})


_FACTOR = re.compile(r"^(Z|C|D|S|A|Q|UT3|HEIS)_?\(?(\d+)\)?(?:\^(\d+))?$", re.IGNORECASE)


def _factor(token: str) -> list[FiniteGroup]:
    match = _FACTOR.match(token.strip())
    if not match:
        raise GroupSpecError(f"unknown group factor {token!r}")
    kind, n, power = match.group(1).upper(), int(match.group(2)), int(match.group(3) or 1)
    if n < 1 or power < 1:
        raise GroupSpecError(f"bad size in {token!r}")
    if kind in ("Z", "C"):
        base = cyclic_group(n)
    elif kind == "D":
        if n < 3:
            raise GroupSpecError("dihedral groups need n >= 3")
        base = dihedral_group(n)
    elif kind == "S":
        if n > 6:
            raise GroupSpecError("symmetric groups limited to S6")
        base = symmetric_group(n)
    elif kind == "A":
        if not 3 <= n <= 6:
            raise GroupSpecError("alternating groups limited to A3..A6")
        base = symmetric_group(n, even_only=True)
    elif kind == "Q":
        if n != 8:
            raise GroupSpecError("only Q8 is supported")
        base = quaternion_group()
    else:
        if n < 2 or any(n % d == 0 for d in range(2, int(math.isqrt(n)) + 1)):
            raise GroupSpecError("unitriangular groups need a prime modulus")
        base = unitriangular_group(n)
    return [base] * power


def build_group(spec) -> FiniteGroup:
    """Group from a spec string such as ``Z5``, ``Z3xZ3``, ``Z2^3``, ``D4``,
    ``S3``, ``A4``, ``Q8``, ``UT3(2)``, or a dict ``{"table": [[...]], "labels": [...]}``.

    ``D_n`` is the dihedral group of order 2n; factors joined by ``x`` form a
    direct product.
    """
    if isinstance(spec, FiniteGroup):
        return spec
    if isinstance(spec, dict):
        if "table" in spec:
            return table_group(spec["table"], spec.get("labels"), spec.get("name", "table"))
        if "group" in spec:
            return build_group(spec["group"])
        raise GroupSpecError("group dict needs 'table' or 'group'")
    text = str(spec).replace(" ", "").replace("×", "x")
    if not text:
        raise GroupSpecError("empty group spec")
    factors: list[FiniteGroup] = []
    for token in re.split(r"(?<=[\d)])x", text, flags=re.IGNORECASE):
        factors.extend(_factor(token))
    G = factors[0]
    for H in factors[1:]:
        G = direct_product(G, H)
    G.name = text
    return G


def generator_count(G: FiniteGroup, limit: int = 6) -> int | None:
    """Smallest size of a generating set, by brute force over cyclic subgroups."""
    full = (1 << G.order) - 1
    if G.order == 1:
        return 0
    gens = [s.generator for s in enumerate_cyclic_subgroups(G) if s.order > 1]
    for k in range(1, limit + 1):
        for combo in itertools.combinations(gens, k):
            if G.generated(combo) == full:
                return k
    return None


def find_isomorphism(G: FiniteGroup, H: FiniteGroup) -> dict[int, int] | None:
    """An isomorphism G -> H as an index map, or None (brute force on generators)."""
    if G.order != H.order:
        return None
    if sorted(G.element_order(g) for g in range(G.order)) != sorted(H.element_order(h) for h in range(H.order)):
        return None
    k = generator_count(G)
    full = (1 << G.order) - 1
    gens = next(c for c in itertools.combinations(
        [s.generator for s in enumerate_cyclic_subgroups(G) if s.order > 1], k) if G.generated(c) == full)
    candidates = [[h for h in range(H.order) if H.element_order(h) == G.element_order(g)] for g in gens]
    for images in itertools.product(*candidates):
        phi = {G.identity: H.identity}
        frontier = [G.identity]
        ok = True
        while frontier and ok:
            nxt = []
            for x in frontier:
                for g, h in zip(gens, images):
                    y, z = int(G.table[x, g]), int(H.table[phi[x], h])
                    if y in phi:
                        if phi[y] != z:
                            ok = False
                            break
                    else:
                        phi[y] = z
                        nxt.append(y)
                if not ok:
                    break
            frontier = nxt
        if not ok or len(set(phi.values())) != G.order:
            continue
        if all(phi[int(G.table[a, b])] == int(H.table[phi[a], phi[b]])
               for a in range(G.order) for b in range(G.order)):
            return phi
    return None


# ---------------------------------------------------------------------------
# cyclic subgroups and covers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CyclicSubgroup:
    index: int
    generator: int       # smallest element index generating the subgroup
    elements: tuple[int, ...]
    mask: int

    @property
    def order(self) -> int:
        return len(self.elements)


def enumerate_cyclic_subgroups(G: FiniteGroup) -> list[CyclicSubgroup]:
    """Each cyclic subgroup once, sorted by order and then by element set."""
    found: dict[int, tuple[int, tuple[int, ...]]] = {}
    for g in range(G.order):
        elems = tuple(sorted(G.cyclic(g)))
        m = mask_of(elems)
        if m not in found:
            found[m] = (g, elems)
    ordered = sorted(found.items(), key=lambda kv: (len(kv[1][1]), kv[1][1]))
    return [CyclicSubgroup(i, g, elems, m) for i, (m, (g, elems)) in enumerate(ordered)]


@dataclass
class KakeyaCover:
    group: str
    choices: list[tuple[int, int]]   # (subgroup index, coset representative)
    elements: list[int]

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def mask(self) -> int:
        return mask_of(self.elements)

    def to_dict(self, G: FiniteGroup | None = None) -> dict:
        d = {"group": self.group, "size": self.size, "elements": self.elements,
             "choices": [list(c) for c in self.choices]}
        if G is not None:
            d["labels"] = [G.labels[i] for i in self.elements]
        return d


@dataclass
class VerifyResult:
    ok: bool
    witnesses: dict[int, int]      # subgroup index -> coset representative inside E
    violations: list[int]          # subgroup indices with no coset inside E

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {"ok": self.ok, "witnesses": {str(k): v for k, v in self.witnesses.items()},
                "violations": self.violations}


def verify_kakeya(G: FiniteGroup, E, subgroups: list[CyclicSubgroup] | None = None) -> VerifyResult:
    """Does E (iterable of indices or a bitmask) contain a left coset of every cyclic subgroup?"""
    mask = E if isinstance(E, int) else mask_of(E)
    if mask >> G.order:
        raise ValueError("E contains indices outside the group")
    subgroups = subgroups if subgroups is not None else enumerate_cyclic_subgroups(G)
    witnesses, violations = {}, []
    for H in subgroups:
        for c in G.left_cosets(H.elements):
            if c & ~mask == 0:
                witnesses[H.index] = elements_of(c)[0]
                break
        else:
            violations.append(H.index)
    return VerifyResult(not violations, witnesses, violations)


def _choices_for(G: FiniteGroup, subgroups: list[CyclicSubgroup], mask: int) -> list[tuple[int, int]]:
    res = verify_kakeya(G, mask, subgroups)
    return sorted(res.witnesses.items())


def _cover_from_mask(G: FiniteGroup, subgroups, mask: int) -> KakeyaCover:
    return KakeyaCover(G.name, _choices_for(G, subgroups, mask), elements_of(mask))


@dataclass
class MinReport:
    group: str
    order: int
    size: int
    cover: KakeyaCover
    optimal: bool
    nodes: int
    method: str
    elapsed: float
    lexmin: bool = True
    note: str = ""

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.size, self.order)

    def to_dict(self, G: FiniteGroup | None = None) -> dict:
        d = {"group": self.group, "order": self.order, "min_size": self.size,
             "c": f"{self.ratio.numerator}/{self.ratio.denominator}", "c_float": float(self.ratio),
             "optimal": self.optimal, "lexmin": self.lexmin, "nodes": self.nodes, "method": self.method,
             "elapsed_s": self.elapsed, "cover": self.cover.to_dict(G)}
        if self.note:
            d["note"] = self.note
        return d


def maximal_cyclic_subgroups(subgroups: list[CyclicSubgroup]) -> list[CyclicSubgroup]:
    """Cyclic subgroups not properly contained in another cyclic subgroup."""
    out = []
    for H in subgroups:
        if not any(K.mask != H.mask and H.mask & ~K.mask == 0 for K in subgroups):
            out.append(H)
    return out


# ---------------------------------------------------------------------------
# heuristic
# ---------------------------------------------------------------------------

def greedy_upper_bound(G: FiniteGroup, subgroups: list[CyclicSubgroup] | None = None) -> KakeyaCover:
    """Repeatedly add the coset with the fewest new elements (largest overlap).

    Ties go to larger subgroups, then to the coset with the smallest elements.
    """
    subgroups = subgroups if subgroups is not None else enumerate_cyclic_subgroups(G)
    cosets = {H.index: G.left_cosets(H.elements) for H in subgroups}
    U = 0
    pending = sorted(subgroups, key=lambda H: -H.order)
    while pending:
        best = None
        for H in pending:
            for c in cosets[H.index]:
                key = ((c & ~U).bit_count(), -H.order, elements_of(c))
                if best is None or key < best[0]:
                    best = (key, H, c)
        _, H, c = best
        U |= c
        pending = [K for K in pending if not any(d & ~U == 0 for d in cosets[K.index])]
    return _cover_from_mask(G, subgroups, U)


# ---------------------------------------------------------------------------
# branch and bound
# ---------------------------------------------------------------------------

class BudgetExceeded(Exception):
    pass


class _Search:
    """Depth-first search over one coset per variable subgroup."""

    def __init__(self, cosets: list[list[int]], deadline: float):
        self.cosets = cosets          # variables in static order, each a list of coset masks
        self.deadline = deadline
        self.nodes = 0

    def _tick(self):
        self.nodes += 1
        if self.nodes & 1023 == 0 and time.monotonic() > self.deadline:
            raise BudgetExceeded

    def minimize(self, start: int, first: int, upper: int, upper_mask: int) -> tuple[int, int]:
        """Smallest union reachable from ``start`` (strictly below ``upper``)."""
        self.best, self.best_mask = upper, upper_mask
        self._min(start, first)
        return self.best, self.best_mask

    def _min(self, U: int, k: int):
        self._tick()
        cosets = self.cosets
        lb_extra = 0
        nxt = -1
        for j in range(k, len(cosets)):
            cheapest = min((c & ~U).bit_count() for c in cosets[j])
            if cheapest > lb_extra:
                lb_extra = cheapest
            if cheapest and nxt < 0:
                nxt = j
        size = U.bit_count()
        if nxt < 0:
            if size < self.best:
                self.best, self.best_mask = size, U
            return
        if size + lb_extra >= self.best:
            return
        for c in sorted(cosets[nxt], key=lambda c: ((c & ~U).bit_count(), c & -c)):
            self._min(U | c, nxt + 1)

    def feasible(self, target: int, forced: int, forbidden: int) -> int | None:
        """A cover of size exactly ``target`` containing ``forced`` and avoiding ``forbidden``."""
        allowed = [[c for c in cs if not c & forbidden] for cs in self.cosets]
        if any(not cs for cs in allowed):
            return None
        self._allowed, self._target, self._forced = allowed, target, forced
        return self._feas(0, 0)

    def _feas(self, U: int, k: int) -> int | None:
        self._tick()
        allowed = self._allowed
        lb_extra = 0
        nxt = -1
        for j in range(k, len(allowed)):
            cheapest = min((c & ~U).bit_count() for c in allowed[j])
            if cheapest > lb_extra:
                lb_extra = cheapest
            if cheapest and nxt < 0:
                nxt = j
        size = U.bit_count()
        if size + lb_extra > self._target or (U | self._forced).bit_count() > self._target:
            return None
        if nxt < 0:
            return U if self._forced & ~U == 0 and size == self._target else None
        for c in sorted(allowed[nxt], key=lambda c: ((c & ~U).bit_count(), c & -c)):
            found = self._feas(U | c, nxt + 1)
            if found is not None:
                return found
        return None


def _lexmin(search: _Search, order: int, size: int, witness: int) -> int:
    """Lexicographically smallest sorted index tuple among covers of the given size."""
    chosen = 0
    forbidden = 0
    current = witness
    while chosen.bit_count() < size:
        last = chosen.bit_length() - 1
        nxt_in_witness = (current & ~((1 << (last + 1)) - 1))
        nxt_in_witness = (nxt_in_witness & -nxt_in_witness).bit_length() - 1
        for x in range(last + 1, nxt_in_witness):
            found = search.feasible(size, chosen | (1 << x), forbidden)
            if found is not None:
                chosen |= 1 << x
                current = found
                break
            forbidden |= 1 << x
        else:
            chosen |= 1 << nxt_in_witness
    return chosen


def min_kakeya_exact(G: FiniteGroup, budget_ms: float | None = DEFAULT_BUDGET_MS) -> MinReport:
    """Provably minimal Kakeya set by branch and bound, within a time budget.

    Variables are the maximal cyclic subgroups taken fewest cosets first.
    The bound at a node is |U| plus, over the unassigned subgroups, the
    largest number of new elements that even their cheapest coset adds.
    """
    t0 = time.monotonic()
    deadline = t0 + (budget_ms / 1000.0 if budget_ms is not None else math.inf)
    subgroups = enumerate_cyclic_subgroups(G)
    variables = [H for H in maximal_cyclic_subgroups(subgroups) if H.order > 1]
    greedy = greedy_upper_bound(G, subgroups)
    if not variables:
        cover = _cover_from_mask(G, subgroups, 1)
        return MinReport(G.name, G.order, 1, cover, True, 0, "trivial-group", time.monotonic() - t0)
    variables.sort(key=lambda H: (G.order // H.order, H.elements))
    cosets = [G.left_cosets(H.elements) for H in variables]
    search = _Search(cosets, deadline)
    try:
        # left translation lets the first variable take the coset through the identity
        first = next(c for c in cosets[0] if c >> G.identity & 1)
        size, mask = search.minimize(first, 1, greedy.size, greedy.mask)
    except BudgetExceeded:
        return MinReport(G.name, G.order, search.best, _cover_from_mask(G, subgroups, search.best_mask),
                         False, search.nodes, "branch-and-bound (budget exhausted)",
                         time.monotonic() - t0, False, "search did not close; size is an upper bound")
    note = ""
    lexmin = True
    try:
        mask = _lexmin(search, G.order, size, mask)
    except BudgetExceeded:
        lexmin = False
        note = "optimum proven; lexicographic tie-break not completed within budget"
    cover = _cover_from_mask(G, subgroups, mask)
    return MinReport(G.name, G.order, size, cover, True, search.nodes, "branch-and-bound",
                     time.monotonic() - t0, lexmin, note)


def oracle_product_size(G: FiniteGroup, subgroups: list[CyclicSubgroup] | None = None) -> int:
    subgroups = subgroups if subgroups is not None else enumerate_cyclic_subgroups(G)
    return math.prod(G.order // H.order for H in subgroups)


def min_kakeya_oracle(G: FiniteGroup, limit: int = ORACLE_LIMIT) -> MinReport:
    """Exhaustive product over coset choices for every cyclic subgroup (trivial one included).

    Shares no pruning logic with the branch and bound; unions are
    accumulated as uint64 masks and deduplicated between factors.
    """
    t0 = time.monotonic()
    subgroups = enumerate_cyclic_subgroups(G)
    total = oracle_product_size(G, subgroups)
    if total > limit:
        raise OracleLimitError(f"product of indices {total} exceeds {limit}")
    if G.order > 64:
        raise OracleLimitError("oracle masks are 64-bit; order must be <= 64")
    unions = np.zeros(1, dtype=np.uint64)
    nodes = 0
    for H in subgroups:
        cm = np.array(G.left_cosets(H.elements), dtype=np.uint64)
        combined = (unions[:, None] | cm[None, :]).ravel()
        nodes += combined.size
        unions = np.unique(combined)
    counts = np.bitwise_count(unions)
    best = int(counts.min())
    candidates = [int(u) for u in unions[counts == best]]
    mask = min(candidates, key=elements_of)
    cover = _cover_from_mask(G, subgroups, mask)
    return MinReport(G.name, G.order, best, cover, True, nodes, "exhaustive-oracle", time.monotonic() - t0)


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

RATIO_COLUMNS = ["group", "order", "exponent", "generator_count", "min_size", "c", "c_float", "optimal"]


def ratio_row(spec, budget_ms: float | None = DEFAULT_BUDGET_MS) -> dict:
    G = build_group(spec)
    rep = min_kakeya_exact(G, budget_ms)
    c = rep.ratio
    return {"group": G.name, "order": G.order, "exponent": G.exponent, "generator_count": generator_count(G),
            "min_size": rep.size, "c": f"{c.numerator}/{c.denominator}", "c_float": float(c),
            "optimal": rep.optimal}


def ratio_table(specs: Iterable, budget_ms: float | None = DEFAULT_BUDGET_MS) -> list[dict]:
    return [ratio_row(s, budget_ms) for s in specs]


SMALL_GROUP_SUITE = ["Z1", "Z2", "Z3", "Z4", "Z2xZ2", "Z5", "Z6", "S3", "Z7", "Z8", "Z2^3", "Z4xZ2", "D4", "Q8",
                     "Z9", "Z3xZ3", "Z10", "D5", "Z11", "Z12", "Z6xZ2", "D6", "A4", "Z13", "Z14", "D7", "Z15",
                     "Z16", "Z8xZ2", "Z4xZ4", "Z4xZ2^2", "Z2^4", "D8", "Q8xZ2", "D4xZ2"]

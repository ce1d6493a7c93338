"""Concrete finite groups with index arithmetic.

Conventions used everywhere in this package:

* group elements are the indices 0..order-1 and index 0 is the identity;
* permutations act on the right, so p * q means "apply p, then q";
* commutators are left normed: [a, b] = a^-1 b^-1 a b.

Groups of order at most ``DENSE_TABLE_LIMIT`` store a full flat
multiplication table (row-major, ``table[a * n + b] == a * b``).  Larger
permutation groups compose stored images through a hash map instead,
which is slower but not bounded by table memory.  All structures are
immutable after construction; lazily computed attributes (conjugacy
classes, the subgroup lattice) are cached on the instance and safe to
share between threads.
"""

from __future__ import annotations

import random
from array import array
from dataclasses import dataclass
from math import lcm
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BudgetExceededError, GroupConstructionError

DENSE_TABLE_LIMIT = 4096
CLOSURE_ORDER_CAP = 200_000

# Associativity is checked on all triples up to this order, and on seeded
# random triples above it.
EXHAUSTIVE_ASSOCIATIVITY_LIMIT = 256
_SPOT_CHECK_TRIPLES = 4096


@dataclass(frozen=True)
class ConjugacyClasses:
    """Partition of a group into conjugation orbits.

    ``class_of[g]`` is the class index of element g, ``representatives[c]``
    is the least element of class c, and class 0 is the identity's class.
    """

    class_of: tuple[int, ...]
    representatives: tuple[int, ...]
    sizes: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.representatives)

    def members(self, c: int) -> list[int]:
        return [g for g, k in enumerate(self.class_of) if k == c]


class FiniteGroup:
    """A fully enumerated finite group on element indices 0..order-1."""

    __slots__ = (
        "name",
        "order",
        "source",
        "element_labels",
        "_table",
        "_inv",
        "_perms",
        "_perm_index",
        "_cache",
    )

    def __init__(
        self,
        *,
        name: str,
        order: int,
        source: str,
        table: array | None,
        inv: tuple[int, ...],
        perms: tuple[tuple[int, ...], ...] | None = None,
        perm_index: dict[bytes, int] | None = None,
        element_labels: list[str] | None = None,
    ) -> None:
        self.name = name
        self.order = order
        self.source = source
        self.element_labels = element_labels
        self._table = table
        self._inv = inv
        self._perms = perms
        self._perm_index = perm_index
        self._cache: dict[str, object] = {}

    # -- construction -------------------------------------------------

    @classmethod
    def from_cayley_table(
        cls,
        table: Sequence[Sequence[int]],
        *,
        name: str = "table",
        source: str = "table",
        element_labels: list[str] | None = None,
        validate: bool = True,
    ) -> "FiniteGroup":
        """Build a group from an n-by-n multiplication table of indices.

        The table must be a Latin square with the identity at index 0 and
        an associative product; violations raise GroupConstructionError
        naming a witness.
        """
        n = len(table)
        if n == 0:
            raise GroupConstructionError("empty table")
        flat = array("i")
        for i, row in enumerate(table):
            if len(row) != n:
                raise GroupConstructionError(f"row {i} has length {len(row)}, expected {n}")
            flat.extend(int(x) for x in row)
        if validate:
            _validate_table(flat, n)
        inv = _inverses_from_table(flat, n)
        return cls(
            name=name,
            order=n,
            source=source,
            table=flat,
            inv=inv,
            element_labels=element_labels,
        )

    @classmethod
    def from_permutation_generators(
        cls,
        degree: int,
        gens: Sequence[Sequence[int]],
        *,
        name: str = "perm",
        source: str = "generators",
        order_cap: int = CLOSURE_ORDER_CAP,
    ) -> "FiniteGroup":
        """Close a set of permutations of {1..degree} under composition.

        Generators use image notation (1-based: entry i is the image of
        i).  Elements are indexed in breadth-first discovery order with
        the identity first, which makes indices reproducible across runs.
        """
        if degree < 1:
            raise GroupConstructionError("degree must be positive")
        gen_perms: list[tuple[int, ...]] = []
        for j, g in enumerate(gens):
            images = tuple(int(x) - 1 for x in g)
            if len(images) != degree or sorted(images) != list(range(degree)):
                raise GroupConstructionError(
                    f"generator {j} is not a bijection of 1..{degree}: {tuple(g)}"
                )
            gen_perms.append(images)

        identity = tuple(range(degree))
        perms: list[tuple[int, ...]] = [identity]
        index: dict[tuple[int, ...], int] = {identity: 0}
        head = 0
        while head < len(perms):
            p = perms[head]
            head += 1
            for q in gen_perms:
                # right action: p then q
                r = tuple(q[p[x]] for x in range(degree))
                if r not in index:
                    if len(perms) >= order_cap:
                        raise BudgetExceededError(
                            f"closure exceeds order cap {order_cap}"
                        )
                    index[r] = len(perms)
                    perms.append(r)

        n = len(perms)
        labels = [_cycle_notation(p) for p in perms]
        if n <= DENSE_TABLE_LIMIT:
            flat = _table_from_perms(perms, index)
            inv = _inverses_from_table(flat, n)
            return cls(
                name=name,
                order=n,
                source=source,
                table=flat,
                inv=inv,
                element_labels=labels,
            )
        byte_index = {bytes(np.array(p, dtype=np.uint32).tobytes()): i for p, i in index.items()}
        inv = tuple(index[_invert_perm(p)] for p in perms)
        return cls(
            name=name,
            order=n,
            source=source,
            table=None,
            inv=inv,
            perms=tuple(perms),
            perm_index=byte_index,
            element_labels=labels,
        )

    # -- arithmetic ----------------------------------------------------

    def mul(self, a: int, b: int) -> int:
        if self._table is not None:
            return self._table[a * self.order + b]
        pa = self._perms[a]
        pb = self._perms[b]
        r = tuple(pb[x] for x in pa)
        return self._perm_index[bytes(np.array(r, dtype=np.uint32).tobytes())]

    def inv(self, a: int) -> int:
        return self._inv[a]

    def power(self, a: int, e: int) -> int:
        """a**e by binary powering; negative exponents go through inv."""
        if e < 0:
            a, e = self._inv[a], -e
        r = 0
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    def conjugate(self, g: int, h: int) -> int:
        """h * g * h^-1."""
        return self.mul(self.mul(h, g), self._inv[h])

    def commutator(self, a: int, b: int) -> int:
        """[a, b] = a^-1 b^-1 a b."""
        return self.mul(self.mul(self._inv[a], self._inv[b]), self.mul(a, b))

    def elements(self) -> range:
        return range(self.order)

    def label(self, g: int) -> str:
        if self.element_labels is not None:
            return self.element_labels[g]
        return str(g)

    # -- structure -----------------------------------------------------

    @property
    def np_table(self) -> np.ndarray:
        """The multiplication table as an (n, n) int32 array (dense groups only)."""
        cached = self._cache.get("np_table")
        if cached is None:
            if self._table is None:
                raise BudgetExceededError(
                    f"group {self.name} of order {self.order} has no dense table"
                )
            cached = np.frombuffer(self._table, dtype=np.int32).reshape(self.order, self.order)
            self._cache["np_table"] = cached
        return cached  # type: ignore[return-value]

    @property
    def np_inv(self) -> np.ndarray:
        cached = self._cache.get("np_inv")
        if cached is None:
            cached = np.array(self._inv, dtype=np.int32)
            self._cache["np_inv"] = cached
        return cached  # type: ignore[return-value]

    @property
    def is_abelian(self) -> bool:
        cached = self._cache.get("abelian")
        if cached is None:
            if self._table is not None:
                t = self.np_table
                cached = bool((t == t.T).all())
            else:
                cached = all(
                    self.mul(a, b) == self.mul(b, a)
                    for a in range(self.order)
                    for b in range(a)
                )
            self._cache["abelian"] = cached
        return bool(cached)

    def divisors(self) -> tuple[int, ...]:
        cached = self._cache.get("divisors")
        if cached is None:
            n = self.order
            cached = tuple(d for d in range(1, n + 1) if n % d == 0)
            self._cache["divisors"] = cached
        return cached  # type: ignore[return-value]

    def element_order(self, a: int) -> int:
        # Lagrange: the order divides |G|, so only divisors need testing.
        for d in self.divisors():
            if self.power(a, d) == 0:
                return d
        raise AssertionError("element order not found; table is not a group")

    def exponent(self) -> int:
        """Least common multiple of all element orders."""
        cached = self._cache.get("exponent")
        if cached is None:
            classes = self.conjugacy_classes()
            cached = lcm(*(self.element_order(r) for r in classes.representatives))
            self._cache["exponent"] = cached
        return cached  # type: ignore[return-value]

    def conjugacy_classes(self) -> ConjugacyClasses:
        cached = self._cache.get("classes")
        if cached is None:
            cached = self._compute_classes()
            self._cache["classes"] = cached
        return cached  # type: ignore[return-value]

    def _compute_classes(self) -> ConjugacyClasses:
        n = self.order
        class_of = [-1] * n
        reps: list[int] = []
        sizes: list[int] = []
        if self._table is not None and n > 16:
            t = self.np_table
            invv = self.np_inv
            for g in range(n):
                if class_of[g] >= 0:
                    continue
                orbit = np.unique(t[t[:, g], invv])
                c = len(reps)
                for x in orbit.tolist():
                    class_of[x] = c
                reps.append(g)
                sizes.append(int(orbit.size))
        else:
            for g in range(n):
                if class_of[g] >= 0:
                    continue
                orbit = {self.conjugate(g, h) for h in range(n)}
                c = len(reps)
                for x in orbit:
                    class_of[x] = c
                reps.append(g)
                sizes.append(len(orbit))
        return ConjugacyClasses(tuple(class_of), tuple(reps), tuple(sizes))

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name!r}, order={self.order})"


# -- table validation ----------------------------------------------------


def _validate_table(flat: array, n: int) -> None:
    t = np.frombuffer(flat, dtype=np.int32).reshape(n, n)
    if t.min() < 0 or t.max() >= n:
        raise GroupConstructionError("table entries out of range")
    want = np.arange(n, dtype=np.int32)
    if not (np.sort(t, axis=1) == want).all():
        bad = int(np.nonzero((np.sort(t, axis=1) != want).any(axis=1))[0][0])
        raise GroupConstructionError(f"row {bad} is not a permutation (not a Latin square)")
    if not (np.sort(t, axis=0) == want[:, None]).all():
        bad = int(np.nonzero((np.sort(t, axis=0) != want[:, None]).any(axis=0))[0][0])
        raise GroupConstructionError(f"column {bad} is not a permutation (not a Latin square)")
    if not (t[0] == want).all() or not (t[:, 0] == want).all():
        raise GroupConstructionError("index 0 is not a two-sided identity")
    if n <= EXHAUSTIVE_ASSOCIATIVITY_LIMIT:
        chunk = max(1, (1 << 22) // (n * n))
        for a0 in range(0, n, chunk):
            block = t[a0 : a0 + chunk]
            left = t[block.reshape(-1), :].reshape(block.shape[0], n, n)  # (a*b)*c
            right = block[:, t]  # a*(b*c)
            if not (left == right).all():
                a, b, c = (int(x) for x in np.argwhere(left != right)[0])
                raise GroupConstructionError(
                    f"associativity fails at triple ({a0 + a}, {b}, {c})"
                )
    else:
        rng = random.Random(0xA550C)
        for _ in range(_SPOT_CHECK_TRIPLES):
            a, b, c = (rng.randrange(n) for _ in range(3))
            if t[t[a, b], c] != t[a, t[b, c]]:
                raise GroupConstructionError(f"associativity fails at triple ({a}, {b}, {c})")


def _inverses_from_table(flat: array, n: int) -> tuple[int, ...]:
    t = np.frombuffer(flat, dtype=np.int32).reshape(n, n)
    inv = np.argmax(t == 0, axis=1)
    return tuple(int(x) for x in inv)


def _table_from_perms(
    perms: list[tuple[int, ...]], index: dict[tuple[int, ...], int]
) -> array:
    n = len(perms)
    p = np.array(perms, dtype=np.int64)
    flat = array("i", bytes(4 * n * n))
    view = np.frombuffer(flat, dtype=np.int32).reshape(n, n)
    # composed[b] = perms[b] evaluated after perms[a]
    for a in range(n):
        composed = p[:, p[a]]
        for b in range(n):
            view[a, b] = index[tuple(composed[b].tolist())]
    return flat


def _invert_perm(p: tuple[int, ...]) -> tuple[int, ...]:
    q = [0] * len(p)
    for i, x in enumerate(p):
        q[x] = i
    return tuple(q)


def _cycle_notation(p: tuple[int, ...]) -> str:
    seen = [False] * len(p)
    parts: list[str] = []
    for start in range(len(p)):
        if seen[start] or p[start] == start:
            seen[start] = True
            continue
        cyc = [start]
        seen[start] = True
        x = p[start]
        while x != start:
            cyc.append(x)
            seen[x] = True
            x = p[x]
        parts.append("(" + " ".join(str(i + 1) for i in cyc) + ")")
    return "".join(parts) if parts else "()"


# -- plain-text group files ----------------------------------------------
#
# Two one-group-per-file formats are supported:
#
# * Cayley table: line 1 is n, then n lines of n space-separated element
#   indices (row g, column h gives g*h).
# * Permutation generators: line 1 is the degree d, then one line of d
#   space-separated images of 1..d per generator.
#
# The formats are distinguished by content: a permutation line always
# contains the value d itself, while Cayley entries stay below the header
# value.  Mixed or malformed files raise GroupConstructionError.


def load_group_file(path: str | Path, *, name: str | None = None) -> FiniteGroup:
    """Load a group from either plain-text format (sniffed by content)."""
    path = Path(path)
    rows: list[list[int]] = []
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise GroupConstructionError(f"cannot read {path}: {exc}") from exc
    tokens = [line.split() for line in lines if line.strip() and not line.lstrip().startswith("#")]
    if not tokens:
        raise GroupConstructionError(f"{path}: empty file")
    try:
        header = int(tokens[0][0])
        rows = [[int(x) for x in row] for row in tokens[1:]]
    except ValueError as exc:
        raise GroupConstructionError(f"{path}: non-integer token") from exc
    if len(tokens[0]) != 1:
        raise GroupConstructionError(f"{path}: first line must be a single integer")
    if header < 1:
        raise GroupConstructionError(f"{path}: header must be positive")
    group_name = name or str(path)
    if any(x == header for row in rows for x in row):
        return FiniteGroup.from_permutation_generators(header, rows, name=group_name)
    if len(rows) != header:
        raise GroupConstructionError(
            f"{path}: expected {header} table rows, found {len(rows)}"
        )
    return FiniteGroup.from_cayley_table(rows, name=group_name, source="table")

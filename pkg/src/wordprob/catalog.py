"""Constructive catalog of finite groups.

Spec ids and the families they build (no external group databases; every
family is constructed directly, so builds are hermetic and
deterministic):

    C:n        cyclic of order n
    D:n        dihedral of order 2n   (note: parameter is the polygon, not the order)
    Dic:n      dicyclic of order 4n   (Dic:2 is the quaternion group)
    S:n, A:n   symmetric / alternating permutation groups
    EA:p,k     elementary abelian p^k (p prime)
    H:p        Heisenberg group mod p: unitriangular 3x3, order p^3, class 2
    UT:n,p     unitriangular n x n over the p-element field, class n-1
    P:[a,b,..] direct product of other specs
    file:PATH  load from a plain-text group file (see groups.load_group_file)

Identical ids always construct identical multiplication tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from math import factorial

import numpy as np

from .errors import GroupSpecError
from .groups import DENSE_TABLE_LIMIT, FiniteGroup, load_group_file

FAMILY_ORDER_CAP = DENSE_TABLE_LIMIT
PERM_FAMILY_DEGREE_CAP = 8

_FIXED_CATALOG_IDS = ("S:3", "S:4", "A:4", "A:5", "H:3", "H:5", "UT:4,2")


@dataclass(frozen=True)
class GroupSpec:
    """Parsed form of a catalog id; round-trips through str()."""

    family: str
    params: tuple

    @property
    def id(self) -> str:
        if self.family == "P":
            return "P:[" + ",".join(p.id for p in self.params) + "]"
        if self.family == "file":
            return f"file:{self.params[0]}"
        return f"{self.family}:" + ",".join(str(p) for p in self.params)

    def __str__(self) -> str:
        return self.id

    @staticmethod
    def parse(text: str) -> "GroupSpec":
        text = text.strip()
        if ":" not in text:
            raise GroupSpecError(f"malformed group spec {text!r}")
        family, _, rest = text.partition(":")
        family = family.strip()
        if family == "file":
            if not rest:
                raise GroupSpecError("file spec needs a path")
            return GroupSpec("file", (rest,))
        if family == "P":
            rest = rest.strip()
            if not (rest.startswith("[") and rest.endswith("]")):
                raise GroupSpecError(f"product spec needs [..]: {text!r}")
            inner = rest[1:-1]
            parts: list[str] = []
            depth = 0
            cur = ""
            for ch in inner:
                if ch == "," and depth == 0:
                    parts.append(cur)
                    cur = ""
                    continue
                if ch == "[":
                    depth += 1
                elif ch == "]":
                    depth -= 1
                cur += ch
            if cur.strip():
                parts.append(cur)
            if len(parts) < 2:
                raise GroupSpecError(f"product spec needs at least two factors: {text!r}")
            return GroupSpec("P", tuple(GroupSpec.parse(p) for p in parts))
        try:
            params = tuple(int(p) for p in rest.split(","))
        except ValueError as exc:
            raise GroupSpecError(f"non-integer parameter in {text!r}") from exc
        arity = {"C": 1, "D": 1, "Dic": 1, "S": 1, "A": 1, "H": 1, "EA": 2, "UT": 2}
        if family not in arity:
            raise GroupSpecError(f"unknown family {family!r}")
        if len(params) != arity[family]:
            raise GroupSpecError(
                f"family {family} takes {arity[family]} parameter(s), got {len(params)}"
            )
        return GroupSpec(family, params)


def spec_order(spec: GroupSpec) -> int | None:
    """Group order implied by a spec, or None when it needs a file load."""
    f, p = spec.family, spec.params
    if f == "C":
        return p[0]
    if f == "D":
        return 2 * p[0]
    if f == "Dic":
        return 4 * p[0]
    if f == "S":
        return factorial(p[0])
    if f == "A":
        return max(1, factorial(p[0]) // 2)
    if f == "EA":
        return p[0] ** p[1]
    if f == "H":
        return p[0] ** 3
    if f == "UT":
        n, q = p
        return q ** (n * (n - 1) // 2)
    if f == "P":
        total = 1
        for sub in p:
            o = spec_order(sub)
            if o is None:
                return None
            total *= o
        return total
    return None


def _is_prime(m: int) -> bool:
    if m < 2:
        return False
    d = 2
    while d * d <= m:
        if m % d == 0:
            return False
        d += 1
    return True


def build(spec: GroupSpec | str) -> FiniteGroup:
    """Construct the group named by a spec id."""
    if isinstance(spec, str):
        spec = GroupSpec.parse(spec)
    f, p = spec.family, spec.params
    order = spec_order(spec)
    if order is not None and order > FAMILY_ORDER_CAP and f not in ("S", "A"):
        raise GroupSpecError(
            f"{spec.id} has order {order}, above the family cap {FAMILY_ORDER_CAP}"
        )
    if f == "C":
        return _cyclic(spec.id, p[0])
    if f == "D":
        return _dihedral(spec.id, p[0])
    if f == "Dic":
        return _dicyclic(spec.id, p[0])
    if f == "S":
        return _symmetric(spec.id, p[0])
    if f == "A":
        return _alternating(spec.id, p[0])
    if f == "EA":
        return _elementary_abelian(spec.id, p[0], p[1])
    if f == "H":
        return _unitriangular(spec.id, 3, p[0])
    if f == "UT":
        return _unitriangular(spec.id, p[0], p[1])
    if f == "P":
        return _direct_product(spec.id, [build(sub) for sub in p])
    if f == "file":
        return load_group_file(p[0], name=spec.id)
    raise GroupSpecError(f"unknown family {f!r}")


def _table_group(
    name: str, table: np.ndarray, labels: list[str] | None = None
) -> FiniteGroup:
    return FiniteGroup.from_cayley_table(
        table.tolist(),
        name=name,
        source="family",
        element_labels=labels,
        validate=False,
    )


def _cyclic(name: str, n: int) -> FiniteGroup:
    if n < 1:
        raise GroupSpecError("cyclic order must be positive")
    ar = np.arange(n)
    return _table_group(name, np.add.outer(ar, ar) % n)


def _dihedral(name: str, n: int) -> FiniteGroup:
    if n < 1:
        raise GroupSpecError("dihedral parameter must be positive")
    size = 2 * n
    idx = np.arange(size)
    i, j = idx % n, idx // n
    sign = np.where(j[:, None] == 0, 1, -1)
    rot = (i[:, None] + sign * i[None, :]) % n
    flip = (j[:, None] + j[None, :]) % 2
    labels = [f"r{k}" if k else "e" for k in range(n)] + [
        f"r{k}s" if k else "s" for k in range(n)
    ]
    return _table_group(name, rot + n * flip, labels)


def _dicyclic(name: str, n: int) -> FiniteGroup:
    if n < 1:
        raise GroupSpecError("dicyclic parameter must be positive")
    m = 2 * n
    size = 4 * n
    idx = np.arange(size)
    i, j = idx % m, idx // m
    ib, jb = i[None, :], j[None, :]
    ia, ja = i[:, None], j[:, None]
    rot = np.where(ja == 0, ia + ib, ia - ib)
    carry = (ja == 1) & (jb == 1)
    rot = (rot + np.where(carry, n, 0)) % m
    flip = (ja + jb) % 2
    labels = [f"a{k}" if k else "e" for k in range(m)] + [
        f"a{k}b" if k else "b" for k in range(m)
    ]
    return _table_group(name, rot + m * flip, labels)


def _symmetric_gens(n: int) -> list[list[int]]:
    if n < 2:
        return []
    if n == 2:
        return [[2, 1]]
    return [[2, 1] + list(range(3, n + 1)), list(range(2, n + 1)) + [1]]


def _alternating_gens(n: int) -> list[list[int]]:
    if n < 3:
        return []
    three_cycle = [2, 3, 1] + list(range(4, n + 1))
    if n == 3:
        return [three_cycle]
    if n % 2 == 1:
        return [three_cycle, list(range(2, n + 1)) + [1]]
    return [three_cycle, [1] + list(range(3, n + 1)) + [2]]


def _symmetric(name: str, n: int) -> FiniteGroup:
    if not 1 <= n <= PERM_FAMILY_DEGREE_CAP:
        raise GroupSpecError(f"S:{n} outside supported degrees 1..{PERM_FAMILY_DEGREE_CAP}")
    return FiniteGroup.from_permutation_generators(
        max(n, 1), _symmetric_gens(n), name=name, source="family"
    )


def _alternating(name: str, n: int) -> FiniteGroup:
    if not 1 <= n <= PERM_FAMILY_DEGREE_CAP:
        raise GroupSpecError(f"A:{n} outside supported degrees 1..{PERM_FAMILY_DEGREE_CAP}")
    return FiniteGroup.from_permutation_generators(
        max(n, 1), _alternating_gens(n), name=name, source="family"
    )


def _elementary_abelian(name: str, p: int, k: int) -> FiniteGroup:
    if not _is_prime(p):
        raise GroupSpecError(f"EA base {p} is not prime")
    if k < 1:
        raise GroupSpecError("EA rank must be positive")
    order = p**k
    radix = p ** np.arange(k)
    digits = (np.arange(order)[:, None] // radix[None, :]) % p
    table = np.empty((order, order), dtype=np.int64)
    for a in range(order):
        table[a] = ((digits[a][None, :] + digits) % p) @ radix
    return _table_group(name, table)


def _unitriangular(name: str, n: int, p: int) -> FiniteGroup:
    if not _is_prime(p):
        raise GroupSpecError(f"UT base {p} is not prime")
    if n < 2:
        raise GroupSpecError("UT dimension must be at least 2")
    positions = [(i, j) for i in range(n) for j in range(i + 1, n)]
    k = len(positions)
    order = p**k
    radix = p ** np.arange(k)
    digits = (np.arange(order)[:, None] // radix[None, :]) % p
    mats = np.tile(np.eye(n, dtype=np.int64), (order, 1, 1))
    for t, (i, j) in enumerate(positions):
        mats[:, i, j] = digits[:, t]
    table = np.empty((order, order), dtype=np.int64)
    for a in range(order):
        prods = (mats[a] @ mats) % p
        entry_digits = np.stack([prods[:, i, j] for (i, j) in positions], axis=1)
        table[a] = entry_digits @ radix
    return _table_group(name, table)


def _direct_product(name: str, factors: list[FiniteGroup]) -> FiniteGroup:
    order = 1
    for g in factors:
        if g._table is None:
            raise GroupSpecError("direct products need dense-table factors")
        order *= g.order
    if order > FAMILY_ORDER_CAP:
        raise GroupSpecError(f"product order {order} above cap {FAMILY_ORDER_CAP}")
    # combined index packs left factors as high digits: a = a1 * n2 + a2
    table = np.zeros((1, 1), dtype=np.int64)
    for g in factors:
        t2 = g.np_table.astype(np.int64)
        n1, n2 = table.shape[0], g.order
        b1 = np.repeat(np.arange(n1), n2)
        b2 = np.tile(np.arange(n2), n1)
        new = np.empty((n1 * n2, n1 * n2), dtype=np.int64)
        for a in range(n1 * n2):
            a1, a2 = divmod(a, n2)
            new[a] = table[a1][b1] * n2 + t2[a2][b2]
        table = new
    return _table_group(name, table)


def default_manifest_lines() -> list[str]:
    text = resources.files("wordprob").joinpath("data/manifest.txt").read_text()
    return [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]


def catalog(max_order: int, *, manifest_lines: list[str] | None = None) -> list[GroupSpec]:
    """The built-in corpus with order at most max_order, deterministically ordered.

    Swept families: all C:n, D:n (n >= 2), Dic:n (n >= 2) and EA:p,k
    (k >= 2) in range, a fixed list of named groups, and the product
    manifest (one spec id per line; pass alternate lines to extend).
    """
    if max_order < 1:
        raise ValueError("max_order must be positive")
    specs: list[GroupSpec] = []
    for n in range(1, max_order + 1):
        specs.append(GroupSpec("C", (n,)))
    for n in range(2, max_order // 2 + 1):
        specs.append(GroupSpec("D", (n,)))
    for n in range(2, max_order // 4 + 1):
        specs.append(GroupSpec("Dic", (n,)))
    p = 2
    while p * p <= max_order:
        if _is_prime(p):
            k = 2
            while p**k <= max_order:
                specs.append(GroupSpec("EA", (p, k)))
                k += 1
        p += 1
    for fixed in _FIXED_CATALOG_IDS:
        specs.append(GroupSpec.parse(fixed))
    if manifest_lines is None:
        manifest_lines = default_manifest_lines()
    for line in manifest_lines:
        specs.append(GroupSpec.parse(line))
    seen: dict[str, GroupSpec] = {}
    for s in specs:
        o = spec_order(s)
        if o is None:
            o = build(s).order
        if o <= max_order and s.id not in seen:
            seen[s.id] = s
    return sorted(
        seen.values(), key=lambda s: (spec_order(s) or build(s).order, s.id)
    )

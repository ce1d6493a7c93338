"""Subgroups, centralizers, quotients, and the full subgroup lattice.

A subgroup is stored as an integer bitmask over element indices plus a
sorted element tuple and a small generating witness.  Bitmasks make
deduplication, intersection, and membership cheap, which is what the
lattice enumeration and the residual computations lean on.

Lattice enumeration uses cyclic extension: a subgroup K is reached from
H < K whenever H is normal in K with K/H cyclic of prime order, i.e. by
adjoining some g in the normalizer of H with a prime power landing in H.
Chains of such steps reach exactly the subgroups with a subnormal series
of prime cyclic factors above the starting point, so from the trivial
subgroup alone only solvable subgroups appear.  To cover the rest, the
enumeration is seeded with every perfect subgroup of the solvable
residual of G (any subgroup K sits above its own perfect limit term,
which lies inside that residual, and K/limit is solvable).  The perfect
seeds are found by a naive join closure restricted to the residual,
which stays small at the supported orders.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable

from .errors import BudgetExceededError, NormalityError
from .groups import FiniteGroup

LATTICE_ORDER_CAP = 512


@dataclass(frozen=True)
class SubgroupSet:
    """An element subset closed under the group operation."""

    mask: int
    elements: tuple[int, ...]
    generators: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, g: int) -> bool:
        return bool(self.mask >> g & 1)

    def __repr__(self) -> str:
        return f"SubgroupSet(order={self.order}, generators={self.generators})"


def _mask_to_elements(mask: int) -> tuple[int, ...]:
    out = []
    g = 0
    while mask:
        if mask & 1:
            out.append(g)
        mask >>= 1
        g += 1
    return tuple(out)


def _close_mask(G: FiniteGroup, gens: Iterable[int]) -> int:
    """Bitmask of the subgroup generated by gens (positive words suffice)."""
    mul = G.mul
    gen_list = []
    mask = 1
    frontier = []
    for g in gens:
        if not mask >> g & 1:
            mask |= 1 << g
            frontier.append(g)
        gen_list.append(g)
    while frontier:
        nxt = []
        for x in frontier:
            for g in gen_list:
                y = mul(x, g)
                if not mask >> y & 1:
                    mask |= 1 << y
                    nxt.append(y)
        frontier = nxt
    return mask


def subgroup_from_generators(G: FiniteGroup, gens: Iterable[int]) -> SubgroupSet:
    gens = tuple(dict.fromkeys(g for g in gens if g != 0))
    mask = _close_mask(G, gens)
    return SubgroupSet(mask, _mask_to_elements(mask), gens)


def subgroup_from_elements(G: FiniteGroup, elements: Iterable[int]) -> SubgroupSet:
    """Wrap an already-closed element set, deriving a generating witness."""
    elems = tuple(sorted(set(elements) | {0}))
    mask = 0
    for g in elems:
        mask |= 1 << g
    gens = _witness_generators(G, elems, mask)
    return SubgroupSet(mask, elems, gens)


def _witness_generators(
    G: FiniteGroup, elements: tuple[int, ...], mask: int
) -> tuple[int, ...]:
    gens: list[int] = []
    have = 1
    for x in elements:
        if not have >> x & 1:
            gens.append(x)
            have = _close_mask(G, gens)
            if have == mask:
                break
    return tuple(gens)


def trivial_subgroup(G: FiniteGroup) -> SubgroupSet:
    return SubgroupSet(1, (0,), ())


def whole_group(G: FiniteGroup) -> SubgroupSet:
    mask = (1 << G.order) - 1
    elems = tuple(range(G.order))
    return SubgroupSet(mask, elems, _witness_generators(G, elems, mask))


# -- centralizers ----------------------------------------------------------


def centralizer(G: FiniteGroup, g: int) -> SubgroupSet:
    """All h with h*g == g*h."""
    if G._table is not None:
        t = G.np_table
        elems = tuple(int(x) for x in (t[:, g] == t[g, :]).nonzero()[0])
    else:
        elems = tuple(h for h in range(G.order) if G.mul(h, g) == G.mul(g, h))
    return subgroup_from_elements(G, elems)

def centralizer_of_set(G: FiniteGroup, S: SubgroupSet) -> SubgroupSet:
    """Elements commuting with everything in S.

    Commuting with the generators is enough, so this is the intersection
    of the generators' centralizers (the whole group when S is trivial).
    """
    if not S.generators:
        return whole_group(G)
    masks = [centralizer(G, g).mask for g in S.generators]
    mask = reduce(lambda a, b: a & b, masks)
    return subgroup_from_elements(G, _mask_to_elements(mask))


def is_normal(G: FiniteGroup, H: SubgroupSet) -> bool:
    mul, inv, mask = G.mul, G.inv, H.mask
    gens = H.generators or (0,)
    for g in range(G.order):
        gi = inv(g)
        for h in gens:
            if not mask >> mul(mul(g, h), gi) & 1:
                return False
    return True


def coset_action_kernel(G: FiniteGroup, H: SubgroupSet) -> SubgroupSet:
    """Kernel of the action of G on the right cosets of H.

    Built directly from the permutation action, independently of any
    conjugate/core computation, so it can cross-check residuals.
    """
    n = G.order
    mul = G.mul
    coset_of = [-1] * n
    reps: list[int] = []
    for g in range(n):
        if coset_of[g] < 0:
            c = len(reps)
            reps.append(g)
            for h in H.elements:
                coset_of[mul(h, g)] = c
    kernel = [
        x
        for x in range(n)
        if all(coset_of[mul(r, x)] == coset_of[r] for r in reps)
    ]
    return subgroup_from_elements(G, kernel)


# -- commutators and the lower central series ------------------------------


def commutator_subgroup(G: FiniteGroup, A: SubgroupSet, B: SubgroupSet) -> SubgroupSet:
    """Subgroup generated by {[a, b] : a in A, b in B}."""
    mul, inv = G.mul, G.inv
    comms = set()
    for a in A.elements:
        ia = inv(a)
        for b in B.elements:
            comms.add(mul(mul(ia, inv(b)), mul(a, b)))
    comms.discard(0)
    ordered = sorted(comms)
    mask = _close_mask(G, ordered)
    elems = _mask_to_elements(mask)
    return SubgroupSet(mask, elems, _witness_generators(G, tuple(ordered), mask))


def lower_central_series(
    G: FiniteGroup, subgroup: SubgroupSet | None = None
) -> list[SubgroupSet]:
    """Terms of the lower central series, ending when they stabilize.

    The first term is the given subgroup (the whole group by default) and
    each next term is its commutator with the first.  A trivial final
    term is listed once; a nontrivial stabilized term is repeated once to
    exhibit the stabilization.
    """
    top = subgroup if subgroup is not None else whole_group(G)
    terms = [top]
    while terms[-1].order > 1:
        nxt = commutator_subgroup(G, terms[-1], top)
        terms.append(nxt)
        if nxt.mask == terms[-2].mask:
            break
    return terms


def nilpotency_class(series: list[SubgroupSet]) -> int | None:
    """Class from a lower central series, or None if it never reaches 1."""
    if series[-1].order != 1:
        return None
    return len(series) - 1


# -- quotients --------------------------------------------------------------


@dataclass(frozen=True)
class Quotient:
    """A quotient group together with its projection map."""

    parent: FiniteGroup
    kernel: SubgroupSet
    group: FiniteGroup
    projection: tuple[int, ...]


def quotient(G: FiniteGroup, N: SubgroupSet) -> Quotient:
    """Coset group of G by a normal subgroup N.

    Normality is always checked: callers routinely pass computed
    subgroups whose normality is a conclusion, not a hypothesis.
    """
    if not is_normal(G, N):
        raise NormalityError(f"subgroup of order {N.order} is not normal in {G.name}")
    n = G.order
    mul = G.mul
    coset_of = [-1] * n
    reps: list[int] = []
    for g in range(n):
        if coset_of[g] < 0:
            c = len(reps)
            reps.append(g)
            for h in N.elements:
                coset_of[mul(h, g)] = c
    q = len(reps)
    table = [[coset_of[mul(reps[a], reps[b])] for b in range(q)] for a in range(q)]
    labels = [f"{G.label(r)}N" for r in reps]
    group = FiniteGroup.from_cayley_table(
        table,
        name=f"{G.name}/{N.order}",
        source="table",
        element_labels=labels,
        validate=False,
    )
    return Quotient(parent=G, kernel=N, group=group, projection=tuple(coset_of))


# -- the subgroup lattice ----------------------------------------------------


def all_subgroups(
    G: FiniteGroup, *, order_cap: int = LATTICE_ORDER_CAP
) -> list[SubgroupSet]:
    """Every subgroup of G, largest first (cached on the group).

    Raises BudgetExceededError when |G| exceeds the lattice order cap.
    """
    cached = G._cache.get("lattice")
    if cached is None:
        if G.order > order_cap:
            raise BudgetExceededError(
                f"subgroup lattice of {G.name} (order {G.order}) exceeds cap {order_cap}"
            )
        cached = _enumerate_subgroups(G)
        G._cache["lattice"] = cached
    return list(cached)  # type: ignore[arg-type]


def subgroups_of_index_at_most(
    G: FiniteGroup, n: int, *, order_cap: int = LATTICE_ORDER_CAP
) -> list[SubgroupSet]:
    """All subgroups H with |G:H| <= n, filtered from the full lattice."""
    if n < 1:
        raise ValueError("index bound must be at least 1")
    return [H for H in all_subgroups(G, order_cap=order_cap) if H.order * n >= G.order]


def _solvable_residual_mask(G: FiniteGroup) -> int:
    top = whole_group(G)
    cur = top
    while True:
        nxt = commutator_subgroup(G, cur, cur)
        if nxt.mask == cur.mask:
            return cur.mask
        cur = nxt


def _join_closure_subgroups(G: FiniteGroup, ambient_mask: int) -> list[SubgroupSet]:
    """All subgroups inside the given closed subset, by repeated joins."""
    ambient = _mask_to_elements(ambient_mask)
    found: dict[int, tuple[int, ...]] = {1: ()}
    queue: list[tuple[int, tuple[int, ...]]] = [(1, ())]
    while queue:
        mask, gens = queue.pop()
        for x in ambient:
            if mask >> x & 1:
                continue
            new_gens = gens + (x,)
            new_mask = _close_mask(G, new_gens)
            if new_mask not in found:
                found[new_mask] = new_gens
                queue.append((new_mask, new_gens))
    return [
        SubgroupSet(mask, _mask_to_elements(mask), gens)
        for mask, gens in found.items()
    ]


def _is_prime(m: int) -> bool:
    if m < 2:
        return False
    d = 2
    while d * d <= m:
        if m % d == 0:
            return False
        d += 1
    return True


def _enumerate_subgroups(G: FiniteGroup) -> list[SubgroupSet]:
    n = G.order
    mul, inv = G.mul, G.inv

    seeds: list[SubgroupSet] = [trivial_subgroup(G)]
    residual_mask = _solvable_residual_mask(G)
    if residual_mask != 1:
        for S in _join_closure_subgroups(G, residual_mask):
            if S.order > 1 and commutator_subgroup(G, S, S).mask == S.mask:
                seeds.append(S)

    found: dict[int, SubgroupSet] = {S.mask: S for S in seeds}
    queue: list[SubgroupSet] = list(seeds)
    head = 0
    while head < len(queue):
        H = queue[head]
        head += 1
        h_mask = H.mask
        h_elems = H.elements
        h_gens = H.generators
        covered = h_mask
        for g in range(1, n):
            if covered >> g & 1:
                continue
            gi = inv(g)
            if any(not h_mask >> mul(mul(g, h), gi) & 1 for h in h_gens):
                continue
            # least m with g^m in H; extend only by prime steps
            x = g
            m = 1
            while not h_mask >> x & 1:
                x = mul(x, g)
                m += 1
            if not _is_prime(m):
                continue
            k_mask = h_mask
            cur = g
            for _ in range(m - 1):
                for h in h_elems:
                    k_mask |= 1 << mul(h, cur)
                cur = mul(cur, g)
            covered |= k_mask
            if k_mask in found:
                continue
            K = SubgroupSet(k_mask, _mask_to_elements(k_mask), h_gens + (g,))
            found[k_mask] = K
            queue.append(K)

    return sorted(found.values(), key=lambda S: (-S.order, S.elements))

"""Exact and sampled word-map distributions over conjugacy classes.

Exact probabilities are Fractions end to end; no floating point enters
the exact path.  The brute-force counter enumerates all tuples in
mixed-radix order (chunked on leading digits, so partitions merge to the
same exact integer counts regardless of how they are scheduled).  The
chain DP instead pushes a class distribution through one commutation
step per variable; both must agree exactly, and the test suite enforces
that instead of trusting either one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BudgetExceededError, ChainFormError
from .groups import ConjugacyClasses, FiniteGroup
from .words import Word, chain_form, evaluate

DEFAULT_BUDGET = 10**9
_CHUNK = 1 << 18


@dataclass(frozen=True)
class ClassDistribution:
    """Exact-rational probability mass over conjugacy classes.

    Word-map distributions are class functions: every element of class c
    has probability mass(c)/size(c).
    """

    group: FiniteGroup
    classes: ConjugacyClasses
    mass: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if any(m < 0 for m in self.mass):
            raise ValueError("negative class mass")
        if sum(self.mass) != 1:
            raise ValueError("class masses must sum to exactly 1")

    def prob_of(self, g: int) -> Fraction:
        c = self.classes.class_of[g]
        return self.mass[c] / self.classes.sizes[c]

    def max_point(self) -> tuple[int, Fraction]:
        """Element of maximal per-element probability, least index on ties."""
        best_g = 0
        best_p = Fraction(-1)
        for c, rep in enumerate(self.classes.representatives):
            p = self.mass[c] / self.classes.sizes[c]
            if p > best_p:
                best_p = p
                best_g = rep
        return best_g, best_p

    def to_record(self, word_text: str) -> dict:
        return {
            "version": 1,
            "group": self.group.name,
            "word": word_text,
            "classes": [
                [
                    self.classes.representatives[c],
                    self.classes.sizes[c],
                    self.mass[c].numerator,
                    self.mass[c].denominator,
                ]
                for c in range(self.classes.count)
            ],
        }


def _masses_from_element_counts(
    G: FiniteGroup, counts: Sequence[int], total: int
) -> ClassDistribution:
    classes = G.conjugacy_classes()
    class_counts = [0] * classes.count
    for g, c in enumerate(classes.class_of):
        class_counts[c] += int(counts[g])
    mass = tuple(Fraction(x, total) for x in class_counts)
    return ClassDistribution(G, classes, mass)


def _power_vector(G: FiniteGroup, e: int) -> np.ndarray:
    return np.array([G.power(g, e) for g in range(G.order)], dtype=np.int64)


def exact_distribution_bruteforce(
    G: FiniteGroup, w: Word, *, budget: int = DEFAULT_BUDGET
) -> ClassDistribution:
    """Count word-map fibers over all |G|^arity tuples."""
    n = G.order
    k = w.arity
    total = n**k
    if total > budget:
        raise BudgetExceededError(
            f"brute force needs {total} tuples, budget is {budget}"
        )
    if k == 0:
        counts = [0] * n
        counts[0] = 1
        return _masses_from_element_counts(G, counts, 1)
    if G._table is None:
        counts = [0] * n
        from itertools import product as _product

        for tup in _product(range(n), repeat=k):
            counts[evaluate(w, G, tup)] += 1
        return _masses_from_element_counts(G, counts, total)

    t_flat = np.frombuffer(G._table, dtype=np.int32).astype(np.int64).ravel()
    powers = {e: _power_vector(G, e) for e in {e for _, e in w.letters}}
    strides = [n ** (k - 1 - j) for j in range(k)]
    counts = np.zeros(n, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        cols = [(idx // strides[j]) % n for j in range(k)]
        acc = None
        for v, e in w.letters:
            x = powers[e][cols[v - 1]]
            acc = x if acc is None else t_flat[acc * n + x]
        if acc is None:
            acc = np.zeros(len(idx), dtype=np.int64)
        counts += np.bincount(acc, minlength=n)
    return _masses_from_element_counts(G, counts, total)


def _commutation_kernel(G: FiniteGroup) -> list[list[int]]:
    """counts[c][c'] = #{x : [rep(c), x] in class c'}; cached per group."""
    cached = G._cache.get("commutation_kernel")
    if cached is None:
        classes = G.conjugacy_classes()
        n = G.order
        rows: list[list[int]] = []
        if G._table is not None:
            t = G.np_table
            invv = G.np_inv
            class_of = np.array(classes.class_of, dtype=np.int64)
            xs = np.arange(n)
            for a in classes.representatives:
                ia = G.inv(a)
                u = t[ia, invv]  # a^-1 x^-1
                vv = t[u, a]  # a^-1 x^-1 a
                com = t[vv, xs]  # [a, x]
                rows.append(np.bincount(class_of[com], minlength=classes.count).tolist())
        else:
            for a in classes.representatives:
                row = [0] * classes.count
                for x in range(n):
                    row[classes.class_of[G.commutator(a, x)]] += 1
                rows.append(row)
        cached = rows
        G._cache["commutation_kernel"] = cached
    return cached  # type: ignore[return-value]


def exact_distribution_dp(G: FiniteGroup, w: Word) -> ClassDistribution:
    """Class-function DP for left-normed chain words.

    The base distribution is the push-forward of g -> g^e onto classes;
    each further variable applies one commutation step, whose transition
    counts depend only on the class of the left argument.  That
    class-only dependence is exactly what the brute-force equivalence
    tests pin down.
    """
    cf = chain_form(w)
    if cf is None:
        raise ChainFormError(f"word {w} is not a left-normed chain")
    e, k = cf
    classes = G.conjugacy_classes()
    n = G.order
    base_counts = [0] * classes.count
    for g in range(n):
        base_counts[classes.class_of[G.power(g, e)]] += 1
    d = [Fraction(x, n) for x in base_counts]
    if k > 1:
        kernel = _commutation_kernel(G)
        for _ in range(k - 1):
            nxt = [Fraction(0)] * classes.count
            for c, mass_c in enumerate(d):
                if not mass_c:
                    continue
                row = kernel[c]
                for c2 in range(classes.count):
                    if row[c2]:
                        nxt[c2] += mass_c * Fraction(row[c2], n)
            d = nxt
    return ClassDistribution(G, classes, tuple(d))


def distribution(
    G: FiniteGroup,
    w: Word,
    *,
    method: str = "auto",
    budget: int = DEFAULT_BUDGET,
) -> ClassDistribution:
    """Exact distribution by the requested method; auto prefers the DP."""
    if method == "dp":
        return exact_distribution_dp(G, w)
    if method in ("bruteforce", "exact"):
        return exact_distribution_bruteforce(G, w, budget=budget)
    if method == "auto":
        if chain_form(w) is not None:
            return exact_distribution_dp(G, w)
        return exact_distribution_bruteforce(G, w, budget=budget)
    raise ValueError(f"unknown method {method!r}")


def prob_at(
    G: FiniteGroup,
    w: Word,
    g: int,
    *,
    method: str = "auto",
    budget: int = DEFAULT_BUDGET,
) -> Fraction:
    return distribution(G, w, method=method, budget=budget).prob_of(g)


def max_point(
    G: FiniteGroup, w: Word, *, method: str = "auto", budget: int = DEFAULT_BUDGET
) -> tuple[int, Fraction]:
    return distribution(G, w, method=method, budget=budget).max_point()


def commuting_probability(
    G: FiniteGroup, k: int, *, method: str = "auto", budget: int = DEFAULT_BUDGET
) -> Fraction:
    """Probability that the left-normed commutator of k uniform elements is 1."""
    from .words import lower_central_word

    return prob_at(G, lower_central_word(k), 0, method=method, budget=budget)


def centralizer_index_tail(
    G: FiniteGroup,
    w: Word,
    threshold: Fraction | int,
    *,
    method: str = "auto",
    budget: int = DEFAULT_BUDGET,
) -> Fraction:
    """Mass of classes whose centralizer index (= class size) is below threshold."""
    dist = distribution(G, w, method=method, budget=budget)
    thr = Fraction(threshold)
    out = Fraction(0)
    for c, size in enumerate(dist.classes.sizes):
        if size < thr:
            out += dist.mass[c]
    return out


# -- Monte Carlo -------------------------------------------------------------


@dataclass(frozen=True)
class Estimate:
    """A sampled point estimate with a Hoeffding confidence radius."""

    point: Fraction
    samples: int
    alpha: float
    radius: float
    seed: int


_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _sample_column(seed: int, var: int, lo: int, hi: int, n: int) -> np.ndarray:
    """Element indices for samples lo..hi-1 of one variable.

    Counter-based: each value is a pure function of (seed, sample index,
    variable), so results do not depend on how the sample range is
    partitioned.  The modulo bias is below n / 2^64 and is ignored.
    """
    idx = np.arange(lo, hi, dtype=np.uint64)
    base = np.uint64((seed ^ (var * _GOLDEN)) & _M64)
    vals = _mix64(_mix64(idx + base) + np.uint64(var + 1))
    return (vals % np.uint64(n)).astype(np.int64)


def monte_carlo(
    G: FiniteGroup,
    w: Word,
    g: int,
    samples: int,
    alpha: float,
    seed: int,
) -> Estimate:
    """Estimate the word-map probability of hitting g by uniform sampling."""
    if samples < 1:
        raise ValueError("samples must be positive")
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    n = G.order
    k = w.arity
    hits = 0
    if G._table is not None and k > 0:
        t_flat = np.frombuffer(G._table, dtype=np.int32).astype(np.int64).ravel()
        powers = {e: _power_vector(G, e) for e in {e for _, e in w.letters}}
        for lo in range(0, samples, _CHUNK):
            hi = min(lo + _CHUNK, samples)
            cols = [_sample_column(seed, v, lo, hi, n) for v in range(1, k + 1)]
            acc = None
            for v, e in w.letters:
                x = powers[e][cols[v - 1]]
                acc = x if acc is None else t_flat[acc * n + x]
            if acc is None:
                acc = np.zeros(hi - lo, dtype=np.int64)
            hits += int(np.count_nonzero(acc == g))
    else:
        for i in range(samples):
            tup = [
                int(_sample_column(seed, v, i, i + 1, n)[0]) for v in range(1, k + 1)
            ]
            if evaluate(w, G, tup) == g:
                hits += 1
    radius = math.sqrt(math.log(2.0 / alpha) / (2.0 * samples))
    return Estimate(
        point=Fraction(hits, samples),
        samples=samples,
        alpha=alpha,
        radius=radius,
        seed=seed,
    )

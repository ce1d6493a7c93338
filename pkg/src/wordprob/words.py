"""Free-group words: parsing, building, and evaluation on finite groups.

Word text grammar (used by the CLI ``--word`` flag as well):

    product := factor { ["*"] factor }
    factor  := atom [ "^" integer ]
    atom    := "1" | variable | "(" product ")"
             | "[" product "," product { "," product } "]"
    variable := "x" digits          (indices start at 1)

``[u, v]`` means u^-1 v^-1 u v and ``[u, v, w]`` binds left, i.e.
``[[u, v], w]``.  Words are stored freely reduced; the printer emits the
bracket sugar for recognized left-normed chain shapes and a plain
product of powers otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce as _reduce
from itertools import product as _product
from typing import Sequence

from .errors import BudgetExceededError, WordSyntaxError
from .groups import FiniteGroup

DEFAULT_EVAL_BUDGET = 10**9


@dataclass(frozen=True)
class Word:
    """A freely reduced word: a tuple of (variable, exponent) letters."""

    letters: tuple[tuple[int, int], ...]

    def __init__(self, letters: tuple[tuple[int, int], ...] = ()) -> None:
        object.__setattr__(self, "letters", _reduce_letters(letters))

    @property
    def arity(self) -> int:
        return max((v for v, _ in self.letters), default=0)

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(tuple((v, -e) for v, e in reversed(self.letters)))

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return self.inverse() ** (-n)
        out = Word()
        for _ in range(n):
            out = out * self
        return out

    def shift(self, offset: int) -> "Word":
        """Rename every variable x_i to x_{i+offset}."""
        return Word(tuple((v + offset, e) for v, e in self.letters))

    def __str__(self) -> str:
        return to_text(self)


def _reduce_letters(
    letters: tuple[tuple[int, int], ...]
) -> tuple[tuple[int, int], ...]:
    out: list[tuple[int, int]] = []
    for v, e in letters:
        v, e = int(v), int(e)
        if v < 1:
            raise ValueError(f"variable index must be positive, got {v}")
        if e == 0:
            continue
        if out and out[-1][0] == v:
            merged = out[-1][1] + e
            out.pop()
            if merged:
                out.append((v, merged))
        else:
            out.append((v, e))
    return tuple(out)


def variable(i: int, exponent: int = 1) -> Word:
    return Word(((i, exponent),))


def commutator(u: Word, v: Word) -> Word:
    """[u, v] = u^-1 v^-1 u v."""
    return u.inverse() * v.inverse() * u * v


def shifted_commutator(u: Word, v: Word) -> Word:
    """[u, v'] with v's variables renamed above u's, keeping them disjoint."""
    return commutator(u, v.shift(u.arity))


def chain_word(base_exponent: int, k: int) -> Word:
    """Left-normed chain: x1^e commutated with fresh variables x2..xk."""
    if k < 1:
        raise ValueError("chain length must be at least 1")
    w = variable(1, base_exponent)
    for i in range(2, k + 1):
        w = commutator(w, variable(i))
    return w


def lower_central_word(k: int) -> Word:
    """[x1, x2, ..., xk]: x1 for k=1, then commutation with fresh variables."""
    return chain_word(1, k)


def square_commutator_word(k: int) -> Word:
    """x1^2 for k=1, otherwise [x1^2, x2, ..., xk]."""
    return chain_word(2, k)


def derived_word(k: int) -> Word:
    """Iterated disjoint commutator: d1 = x1, d_{k+1} = [d_k, d_k'] on fresh variables."""
    if k < 1:
        raise ValueError("k must be at least 1")
    w = variable(1)
    for _ in range(k - 1):
        w = shifted_commutator(w, w)
    return w


def chain_form(w: Word) -> tuple[int, int] | None:
    """(base exponent, length) if w is a left-normed chain, else None.

    Candidate base exponent is read off the first letter in variable 1
    and confirmed by rebuilding the chain and comparing reduced letters.
    """
    k = w.arity
    if k == 0:
        return None
    if k == 1:
        if len(w.letters) == 1 and w.letters[0][0] == 1:
            return (w.letters[0][1], 1)
        return None
    e = next((-ex for v, ex in w.letters if v == 1), None)
    if e is None:
        return None
    if w == chain_word(e, k):
        return (e, k)
    return None


# -- parsing ----------------------------------------------------------------


def parse(text: str) -> Word:
    """Parse word text (see the module grammar); errors carry a position."""
    parser = _Parser(text)
    w = parser.parse_product()
    parser.skip_ws()
    if parser.pos != len(text):
        raise WordSyntaxError(f"unexpected {text[parser.pos]!r}", parser.pos)
    return w


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse_product(self) -> Word:
        out = self.parse_factor()
        while True:
            c = self.peek()
            if c == "*":
                self.pos += 1
                out = out * self.parse_factor()
            elif c in ("x", "1", "(", "["):
                out = out * self.parse_factor()
            else:
                return out

    def parse_factor(self) -> Word:
        atom = self.parse_atom()
        if self.peek() == "^":
            self.pos += 1
            return atom ** self.parse_int()
        return atom

    def parse_atom(self) -> Word:
        c = self.peek()
        if c == "x":
            self.pos += 1
            idx = self.parse_unsigned()
            if idx == 0:
                raise WordSyntaxError("variable index 0 is not allowed", self.pos - 1)
            return variable(idx)
        if c == "1":
            self.pos += 1
            return Word()
        if c == "(":
            self.pos += 1
            w = self.parse_product()
            self.expect(")")
            return w
        if c == "[":
            self.pos += 1
            parts = [self.parse_product()]
            while self.peek() == ",":
                self.pos += 1
                parts.append(self.parse_product())
            self.expect("]")
            if len(parts) < 2:
                raise WordSyntaxError("commutator needs at least two parts", self.pos)
            return _reduce(commutator, parts)
        raise WordSyntaxError(
            f"expected a variable, '1', '(' or '[', got {c!r}" if c else "unexpected end of input",
            self.pos,
        )

    def expect(self, c: str) -> None:
        if self.peek() != c:
            raise WordSyntaxError(f"expected {c!r}", self.pos)
        self.pos += 1

    def parse_unsigned(self) -> int:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise WordSyntaxError("expected digits", start)
        return int(self.text[start : self.pos])

    def parse_int(self) -> int:
        self.skip_ws()
        sign = 1
        if self.pos < len(self.text) and self.text[self.pos] == "-":
            sign = -1
            self.pos += 1
        return sign * self.parse_unsigned()


def to_text(w: Word) -> str:
    """Canonical text; round-trips through parse()."""
    cf = chain_form(w)
    if cf is not None and cf[1] >= 2:
        e, k = cf
        base = "x1" if e == 1 else f"x1^{e}"
        return "[" + ",".join([base] + [f"x{i}" for i in range(2, k + 1)]) + "]"
    if not w.letters:
        return "1"
    return " ".join(f"x{v}" if e == 1 else f"x{v}^{e}" for v, e in w.letters)


# -- evaluation -------------------------------------------------------------


def evaluate(w: Word, G: FiniteGroup, assignment: Sequence[int]) -> int:
    """Substitute group elements for variables; the empty word gives 0."""
    if len(assignment) < w.arity:
        raise ValueError(
            f"assignment of length {len(assignment)} is too short for arity {w.arity}"
        )
    acc = 0
    for v, e in w.letters:
        acc = G.mul(acc, G.power(assignment[v - 1], e))
    return acc


def power_chain_form(w: Word) -> tuple[int, ...] | None:
    """Per-variable exponents if w is [x1^e1, x2^e2, ..., xk^ek], else None."""
    k = w.arity
    if k == 0:
        return None
    if k == 1:
        if len(w.letters) == 1 and w.letters[0][0] == 1:
            return (w.letters[0][1],)
        return None
    # in the reduced chain every variable first appears inverted
    es: list[int] = []
    for v in range(1, k + 1):
        e = next((-ex for var, ex in w.letters if var == v), None)
        if e is None:
            return None
        es.append(e)
    candidate = variable(1, es[0])
    for i in range(2, k + 1):
        candidate = commutator(candidate, variable(i, es[i - 1]))
    return tuple(es) if w == candidate else None


def _power_chain_is_identity(G: FiniteGroup, es: tuple[int, ...]) -> bool:
    """Value-set walk for power-chain words.

    The achievable values of the i-th prefix form a set A_i with
    A_1 = {g^e1} and A_{i+1} = {[a, g^e_{i+1}]}; the word is an identity
    exactly when the final set is {identity}.  Each step costs at most
    |G|^2 commutators, so this covers all tuples without enumerating
    them.
    """
    images = [sorted({G.power(g, e) for g in range(G.order)}) for e in es]
    reachable = set(images[0])
    for img in images[1:]:
        reachable = {G.commutator(a, u) for a in reachable for u in img}
    return reachable == {0}


def is_identity_of(
    w: Word, G: FiniteGroup, *, budget: int = DEFAULT_EVAL_BUDGET
) -> bool:
    """Whether w evaluates to the identity on every arity-tuple of G.

    Left-normed chains of variable powers are decided by an exact
    value-set walk.  Other words fall back to enumeration, where two
    assignments to a variable are interchangeable whenever all powers of
    them appearing in the word agree, so only one representative per
    power-signature is walked.  The budget caps the representative
    tuples actually enumerated.
    """
    k = w.arity
    if k == 0:
        return True
    es = power_chain_form(w)
    if es is not None:
        if k * G.order * G.order > budget:
            raise BudgetExceededError(
                f"identity check needs up to {k * G.order * G.order} operations, "
                f"budget is {budget}"
            )
        return _power_chain_is_identity(G, es)
    exps: list[list[int]] = [[] for _ in range(k)]
    for v, e in w.letters:
        if e not in exps[v - 1]:
            exps[v - 1].append(e)
    reps: list[list[int]] = []
    cost = 1
    for v in range(1, k + 1):
        sigs: dict[tuple[int, ...], int] = {}
        for g in range(G.order):
            sig = tuple(G.power(g, e) for e in exps[v - 1])
            sigs.setdefault(sig, g)
        reps.append(list(sigs.values()))
        cost *= len(sigs)
        if cost > budget:
            raise BudgetExceededError(
                f"identity check needs {cost}+ tuples, budget is {budget}; "
                "consider a Monte Carlo estimate instead"
            )
    for tup in _product(*reps):
        if evaluate(w, G, tup) != 0:
            return False
    return True

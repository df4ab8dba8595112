"""Reduction gadgets from Boolean formulas to graph games, plus reference oracles.

Literals are DIMACS-style nonzero ints: ``v`` is variable ``v`` and ``-v``
its negation.  Player names follow a fixed scheme so generated games diff
cleanly: ``alpha_<v>``, ``c_<j>``, ``lit_<v>_<j>_pos|neg``, ``chall``,
``sat`` (clauses numbered from 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from .errors import InputError, MalformedCnf, MalformedQbf, Not2QBF
from .game import PlayerSet
from .representations import GraphGame


def _check_clauses(clauses, num_vars: int, error) -> tuple:
    out = []
    for j, clause in enumerate(clauses, 1):
        clause = tuple(int(l) for l in clause)
        if not clause:
            raise error(f"clause {j} is empty")
        if len(clause) > 3:
            raise error(f"clause {j} has {len(clause)} literals (at most 3 allowed)")
        if len(set(clause)) != len(clause):
            raise error(f"clause {j} repeats a literal")
        for lit in clause:
            if lit == 0 or abs(lit) > num_vars:
                raise error(f"clause {j} mentions unknown variable {abs(lit)}")
        out.append(clause)
    return tuple(out)


@dataclass(frozen=True)
class Cnf3:
    """3CNF over variables ``1..num_vars``; variable 1 is the least significant."""

    num_vars: int
    clauses: tuple

    def __post_init__(self):
        if self.num_vars < 1:
            raise MalformedCnf("formula needs at least one variable")
        clauses = _check_clauses(self.clauses, self.num_vars, MalformedCnf)
        object.__setattr__(self, "clauses", clauses)

    def satisfied_by(self, assignment) -> bool:
        """``assignment[v - 1]`` is the truth value of variable ``v``."""
        return all(any(assignment[abs(l) - 1] == (l > 0) for l in c) for c in self.clauses)


@dataclass(frozen=True)
class Qbf2:
    """A ``∀ universals ∃ existentials`` 3CNF, before any normalization."""

    universals: tuple
    existentials: tuple
    clauses: tuple

    def __post_init__(self):
        universals = tuple(int(v) for v in self.universals)
        existentials = tuple(int(v) for v in self.existentials)
        every = universals + existentials
        if len(set(every)) != len(every) or any(v <= 0 for v in every):
            raise Not2QBF("quantified variables must be distinct positive ints")
        top = max(every, default=0)
        clauses = _check_clauses(self.clauses, top, MalformedQbf)
        for clause in clauses:
            for lit in clause:
                if abs(lit) not in every:
                    raise Not2QBF(f"variable {abs(lit)} is not quantified")
        object.__setattr__(self, "universals", universals)
        object.__setattr__(self, "existentials", existentials)
        object.__setattr__(self, "clauses", clauses)

    @property
    def variables(self) -> tuple:
        return self.universals + self.existentials


@dataclass(frozen=True)
class Nqbf2Forall(Qbf2):
    """``∀∃`` 3CNF where each universal ``a`` appears only in ``(a ∨ ¬b)`` and
    ``(¬a ∨ b)`` for a twin existential ``b``."""

    def __post_init__(self):
        super().__post_init__()
        if not self.universals:
            raise MalformedQbf("at least one universal variable is required")
        for a in self.universals:
            occurrences = [c for c in self.clauses if a in c or -a in c]
            if len(occurrences) != 2 or any(len(c) != 2 for c in occurrences):
                raise MalformedQbf(f"universal variable {a} must occur in exactly two binary clauses")
            pos = next((c for c in occurrences if a in c), None)
            neg = next((c for c in occurrences if -a in c), None)
            if pos is None or neg is None:
                raise MalformedQbf(f"universal variable {a} needs one positive and one negative clause")
            b = -[l for l in pos if l != a][0]
            if b <= 0 or b not in self.existentials or set(neg) != {-a, b}:
                raise MalformedQbf(f"universal variable {a} is not tied to a twin existential")

    def twin(self, a: int) -> int:
        pos = next(c for c in self.clauses if a in c)
        return -[l for l in pos if l != a][0]


def normalize_qbf(q: Qbf2) -> Nqbf2Forall:
    """Rewrite into twin form: each universal ``a`` gets a fresh existential
    ``b_a`` that replaces it in the matrix and is tied to it by two clauses."""
    try:
        return Nqbf2Forall(q.universals, q.existentials, q.clauses)
    except MalformedQbf:
        pass
    next_var = max(q.variables, default=0) + 1
    twin = {}
    for a in q.universals:
        twin[a] = next_var
        next_var += 1
    matrix = []
    for clause in q.clauses:
        matrix.append(tuple((twin[abs(l)] if l > 0 else -twin[abs(l)]) if abs(l) in twin else l
                            for l in clause))
    for a in q.universals:
        matrix.append((a, -twin[a]))
        matrix.append((-a, twin[a]))
    return Nqbf2Forall(q.universals, q.existentials + tuple(twin[a] for a in q.universals),
                       tuple(matrix))


# Reference oracles -----------------------------------------------------------

def sat_lexmax(phi: Cnf3):
    """Satisfying assignment maximizing ``Σ 2^v`` over true variables, or None."""
    n = phi.num_vars
    for mask in range((1 << n) - 1, -1, -1):
        assignment = tuple(bool(mask >> k & 1) for k in range(n))
        if phi.satisfied_by(assignment):
            return assignment
    return None


def _clause_true(clause, values: dict) -> bool:
    return any(values[abs(l)] == (l > 0) for l in clause)


def qbf_valid(q: Qbf2) -> bool:
    """Brute force: every universal assignment extends to a model."""
    if len(q.variables) > 20:
        raise InputError("brute-force QBF check is limited to 20 variables")
    for ubits in product((False, True), repeat=len(q.universals)):
        values = dict(zip(q.universals, ubits))
        found = False
        for ebits in product((False, True), repeat=len(q.existentials)):
            values.update(zip(q.existentials, ebits))
            if all(_clause_true(c, values) for c in q.clauses):
                found = True
                break
        if not found:
            return False
    return True


# Gadgets ---------------------------------------------------------------------

@dataclass(frozen=True)
class Gadget:
    kind: str  # "kernel" or "bs"
    game: GraphGame
    x: tuple
    n: int  # universal variables for "bs", all variables for "kernel"
    m: int
    penalty: tuple  # edges (i, j) carrying the penalty weight

    def __iter__(self):
        yield self.game
        yield self.x

    @property
    def chall(self) -> int:
        return self.game.players.idx("chall")

    @property
    def sat(self) -> int:
        return self.game.players.idx("sat")

    def meta(self) -> dict:
        expected = ("member iff variable 1 is true in the lexicographically maximum model"
                    if self.kind == "kernel" else "member iff the formula is valid")
        return {"kind": self.kind, "n": self.n, "m": self.m,
                "players": self.game.players.n, "expected": expected}


def _lit_name(lit: int, j: int) -> str:
    return f"lit_{abs(lit)}_{j}_{'pos' if lit > 0 else 'neg'}"


class _EdgeBook:
    """Collects weighted edges, merging repeats of the same penalty pair."""

    def __init__(self, names):
        self.names = list(names)
        self.index = {name: k for k, name in enumerate(self.names)}
        self.weights = {}
        self.penalty = set()

    def add(self, a: str, b: str, w, penalty: bool = False) -> None:
        i, j = sorted((self.index[a], self.index[b]))
        if (i, j) in self.weights:
            if self.weights[(i, j)] != w or not penalty:
                raise AssertionError(f"conflicting edge {a}-{b}")
            return
        self.weights[(i, j)] = Fraction(w)
        if penalty:
            self.penalty.add((i, j))

    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def game(self) -> GraphGame:
        return GraphGame(PlayerSet(tuple(self.names)),
                         tuple((i, j, w) for (i, j), w in self.weights.items()))


def _occurrences(clauses):
    """``(lit, j, player name)`` for every literal occurrence."""
    return [(lit, j, _lit_name(lit, j)) for j, c in enumerate(clauses, 1) for lit in c]


def build_kernel_gadget(phi: Cnf3) -> Gadget:
    """Graph game whose kernel test at ``x = (sat: 1, others: 0)`` reads off
    variable 1 of the lexicographically maximum model of ``phi``."""
    if not isinstance(phi, Cnf3):
        raise MalformedCnf("expected a Cnf3 formula")
    n, m = phi.num_vars, len(phi.clauses)
    occ = _occurrences(phi.clauses)
    names = ([f"alpha_{v}" for v in range(1, n + 1)]
             + [f"c_{j}" for j in range(1, m + 1)]
             + [name for _, _, name in occ] + ["chall", "sat"])
    book = _EdgeBook(names)
    for lit, j, name in occ:
        book.add(f"c_{j}", name, 2 ** (n + 3))
    for v in range(1, n + 1):
        book.add("chall", f"alpha_{v}", 2 ** v)
        book.add("sat", f"alpha_{v}", 2 ** v + (1 if v == 1 else 0))
    penalty = -(2 ** (m + n + 7))
    for j, clause in enumerate(phi.clauses, 1):
        for a, b in combinations(clause, 2):
            book.add(_lit_name(a, j), _lit_name(b, j), penalty, penalty=True)
    for lit, j, name in occ:
        if lit > 0:
            for lit2, j2, name2 in occ:
                if lit2 == -lit:
                    book.add(name, name2, penalty, penalty=True)
        else:
            book.add(f"alpha_{-lit}", name, penalty, penalty=True)
    if not book.penalty:
        # without a penalty edge the normalizer turns negative and the lemmas fail
        raise MalformedCnf("formula needs a clause with two literals or a negative literal")
    book.add("chall", "sat", 1 - book.total())
    game = book.game()
    x = [Fraction(0)] * len(names)
    x[book.index["sat"]] = Fraction(1)
    return Gadget("kernel", game, tuple(x), n, m, tuple(sorted(book.penalty)))


def build_bs_gadget(q: Nqbf2Forall) -> Gadget:
    """Graph game whose bargaining-set test at ``x = (sat: m, chall: n-1)``
    decides validity of ``q``."""
    if not isinstance(q, Nqbf2Forall):
        raise MalformedQbf("expected a formula in twin (NQBF) form")
    n, m = len(q.universals), len(q.clauses)
    universal = set(q.universals)
    occ = _occurrences(q.clauses)
    names = [f"c_{j}" for j in range(1, m + 1)] + [name for _, _, name in occ] + ["chall", "sat"]
    book = _EdgeBook(names)
    penalty = -m - 1
    for lit, j, name in occ:
        book.add(f"c_{j}", name, 1)
        if abs(lit) in universal:
            book.add("chall", name, 1)
    for lit, j, name in occ:
        if lit > 0:
            for lit2, j2, name2 in occ:
                if lit2 == -lit:
                    book.add(name, name2, penalty, penalty=True)
    for j, clause in enumerate(q.clauses, 1):
        for a, b in combinations(clause, 2):
            book.add(_lit_name(a, j), _lit_name(b, j), penalty, penalty=True)
    for lit, j, name in occ:
        if abs(lit) not in universal:
            book.add("chall", name, penalty, penalty=True)
    for j in range(1, m + 1):
        book.add("chall", f"c_{j}", penalty, penalty=True)
    book.add("chall", "sat", n - 1 + m - book.total())
    game = book.game()
    x = [Fraction(0)] * len(names)
    x[book.index["sat"]] = Fraction(m)
    x[book.index["chall"]] = Fraction(n - 1)
    return Gadget("bs", game, tuple(x), n, m, tuple(sorted(book.penalty)))


def max_worth_avoiding_normalizer(g: Gadget) -> Fraction:
    """Largest worth of a coalition not containing both ``chall`` and ``sat``."""
    pair = (1 << g.chall) | (1 << g.sat)
    table = g.game.worth_table()
    return max(w for S, w in enumerate(table) if S & pair != pair)


def lemma_report(g: Gadget) -> dict:
    """Evaluate the gadget's weight lemmas exactly; every value should be True."""
    D = max_worth_avoiding_normalizer(g)
    w_cs = g.game.weight(g.chall, g.sat)
    penalties_ok = all(D + g.game.weight(i, j) < 0 for i, j in g.penalty)
    if g.kind == "kernel":
        return {"D": D, "normalizer": w_cs,
                "normalizer>=D+1": w_cs >= D + 1,
                "D+penalty<0": penalties_ok and bool(g.penalty)}
    return {"D": D, "normalizer": w_cs,
            "D<=m": D <= g.m,
            "normalizer>2m": w_cs > 2 * g.m,
            "D+penalty<0": penalties_ok,
            "m>=2n": g.m >= 2 * g.n}


# DIMACS / QDIMACS ------------------------------------------------------------------

def _tokens(text: str, error):
    """Yield ``(line_number, kind, ints)`` for header/prefix/clause material."""
    header = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if header is not None:
                raise error(f"line {lineno}: second problem line")
            if len(parts) != 4 or parts[1] != "cnf":
                raise error(f"line {lineno}: expected 'p cnf <vars> <clauses>'")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise error(f"line {lineno}: bad problem line {line!r}")
            yield lineno, "p", list(header)
            continue
        if header is None:
            raise error(f"line {lineno}: data before the problem line")
        kind = "clause"
        if parts[0] in ("a", "e"):
            kind, parts = parts[0], parts[1:]
        try:
            ints = [int(p) for p in parts]
        except ValueError:
            raise error(f"line {lineno}: non-integer token in {line!r}")
        yield lineno, kind, ints
    if header is None:
        raise error("missing 'p cnf' problem line")


def _collect(text: str, error):
    header = None
    prefix = []
    clauses = []
    pending = []
    last_line = 0
    for lineno, kind, ints in _tokens(text, error):
        last_line = lineno
        if kind == "p":
            header = ints
            continue
        if kind in ("a", "e"):
            if pending or clauses:
                raise error(f"line {lineno}: quantifier block after clauses")
            if not ints or ints[-1] != 0:
                raise error(f"line {lineno}: quantifier block must end with 0")
            prefix.append((kind, ints[:-1]))
            continue
        for v in ints:
            if v == 0:
                clauses.append(tuple(pending))
                pending = []
            else:
                pending.append(v)
    if pending:
        raise error(f"line {last_line}: last clause is not terminated by 0")
    num_vars, num_clauses = header
    if len(clauses) != num_clauses:
        raise error(f"header announces {num_clauses} clauses, found {len(clauses)}")
    for clause in clauses:
        for lit in clause:
            if abs(lit) > num_vars:
                raise error(f"literal {lit} exceeds the declared {num_vars} variables")
    return num_vars, prefix, clauses


def parse_dimacs(text: str) -> Cnf3:
    num_vars, prefix, clauses = _collect(text, MalformedCnf)
    if prefix:
        raise MalformedCnf("quantifier lines are not allowed in plain DIMACS")
    return Cnf3(num_vars, tuple(clauses))


def parse_qdimacs(text: str) -> Qbf2:
    """QDIMACS restricted to one universal block followed by one existential block."""
    num_vars, prefix, clauses = _collect(text, MalformedQbf)
    kinds = [k for k, _ in prefix]
    if kinds not in (["a"], ["a", "e"]):
        raise Not2QBF("prefix must be one 'a' block optionally followed by one 'e' block")
    universals = tuple(prefix[0][1])
    existentials = tuple(prefix[1][1]) if len(prefix) > 1 else ()
    quantified = set(universals) | set(existentials)
    free = {abs(l) for c in clauses for l in c} - quantified
    if free:
        raise Not2QBF(f"free variables {sorted(free)} would add an outer existential block")
    for v in quantified:
        if v > num_vars:
            raise MalformedQbf(f"quantified variable {v} exceeds the declared {num_vars}")
    return Qbf2(universals, existentials, tuple(clauses))


def write_dimacs(phi: Cnf3) -> str:
    lines = [f"p cnf {phi.num_vars} {len(phi.clauses)}"]
    lines += [" ".join(map(str, c)) + " 0" for c in phi.clauses]
    return "\n".join(lines) + "\n"


def write_qdimacs(q: Qbf2) -> str:
    top = max(q.variables, default=0)
    lines = [f"p cnf {top} {len(q.clauses)}",
             "a " + " ".join(map(str, q.universals)) + " 0"]
    if q.existentials:
        lines.append("e " + " ".join(map(str, q.existentials)) + " 0")
    lines += [" ".join(map(str, c)) + " 0" for c in q.clauses]
    return "\n".join(lines) + "\n"


def gadget_size(clauses, num_vars: int = 0) -> int:
    """Player count of the gadget built from ``clauses`` (``num_vars`` adds the
    variable players of the kernel construction)."""
    return num_vars + len(clauses) + sum(len(c) for c in clauses) + 2


__all__ = [
    "Cnf3", "Qbf2", "Nqbf2Forall", "Gadget", "normalize_qbf", "sat_lexmax", "qbf_valid",
    "build_kernel_gadget", "build_bs_gadget", "lemma_report", "max_worth_avoiding_normalizer",
    "parse_dimacs", "parse_qdimacs", "write_dimacs", "write_qdimacs", "gadget_size",
]

"""Decision procedures for the core, the kernel and the bargaining set."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import BadCoalition, InputError, NotAnImputation
from .game import (Coalition, ExcessTable, Game, check_enumerable, check_payoff,
                   is_imputation, max_excess, members, payoff_sum, popcount,
                   resolve_engine, submasks)
from .lp import GE, LE, EQ, LinConstraint, LinSystem, extract_iis, is_feasible, open_feasible, solve

GRAND_TAG = "grand<="


# Core ------------------------------------------------------------------------

@dataclass(frozen=True)
class CoreVerdict:
    member: bool
    blocking: Coalition | None = None
    deficit: Fraction | None = None
    reason: str = ""


def core_check(game: Game, x: Sequence[Fraction], engine: str = "auto",
               force: bool = False) -> CoreVerdict:
    check_payoff(game, x)
    x = tuple(Fraction(v) for v in x)
    value, S = max_excess(game, x, engine=engine, nonempty=True, force=force)
    if value > 0:
        return CoreVerdict(False, S, value, "coalition can improve on x")
    total = sum(x, Fraction(0))
    grand = game.worth(game.players.grand)
    if total != grand:
        return CoreVerdict(False, reason=f"inefficient: x(N) = {total} != v(N) = {grand}")
    return CoreVerdict(True)


@dataclass(frozen=True)
class EmptinessCertificate:
    """Coalitions whose claims, together with ``x(N) <= v(N)``, cannot all be met."""

    coalitions: tuple
    worths: tuple
    grand_worth: Fraction

    def system(self, n: int) -> LinSystem:
        grand = (1 << n) - 1
        return LinSystem(n, tuple(_coalition_row(n, S, w) for S, w in
                                  zip(self.coalitions, self.worths))
                         + (_grand_row(n, grand, self.grand_worth),))

    def verify(self, n: int) -> bool:
        return len(self.coalitions) <= n and not is_feasible(self.system(n))


@dataclass(frozen=True)
class CoreResult:
    nonempty: bool
    point: tuple | None = None
    certificate: EmptinessCertificate | None = None
    iterations: int = 0


def _coalition_row(n: int, S: Coalition, worth: Fraction) -> LinConstraint:
    return LinConstraint(tuple(1 if S >> k & 1 else 0 for k in range(n)), GE, worth, tag=S)


def _grand_row(n: int, grand: Coalition, worth: Fraction) -> LinConstraint:
    return LinConstraint((1,) * n, LE, worth, tag=GRAND_TAG)


def _certificate_from(game: Game, sys: LinSystem) -> EmptinessCertificate:
    n = game.n
    iis = extract_iis(sys, protected={GRAND_TAG})
    coalitions = tuple(sorted((c.tag for c in iis.constraints if c.tag != GRAND_TAG),
                              key=lambda S: (popcount(S), S)))
    cert = EmptinessCertificate(coalitions, tuple(game.worth(S) for S in coalitions),
                                game.worth(game.players.grand))
    if not cert.verify(n):
        raise AssertionError("extracted certificate failed re-verification")
    return cert


def core_nonempty(game: Game, mode: str = "constraint-generation", engine: str = "auto",
                  force: bool = False) -> CoreResult:
    """Decide core non-emptiness; returns a core point or an emptiness certificate.

    ``full-lp`` writes every coalition constraint at once.
    ``constraint-generation`` starts from individual rationality and
    efficiency and keeps adding the coalition of maximum excess at the
    current candidate until it is stable or the system turns infeasible.
    """
    n = game.n
    grand = game.players.grand
    v_grand = game.worth(grand)
    if mode == "full-lp":
        check_enumerable(n, force)
        worths = game.worth_table() if n <= 22 else None
        rows = [_coalition_row(n, S, worths[S] if worths else game.worth(S))
                for S in range(1, grand + 1)]
        sys = LinSystem(n, tuple(rows) + (_grand_row(n, grand, v_grand),))
        outcome = solve(sys)
        if not outcome.feasible:
            return CoreResult(False, certificate=_certificate_from(game, sys), iterations=1)
        return CoreResult(True, point=outcome.point, iterations=1)
    if mode != "constraint-generation":
        raise InputError(f"unknown core mode {mode!r}")

    engine = resolve_engine(game, engine)
    rows = [_coalition_row(n, 1 << k, game.worth(1 << k)) for k in range(n)]
    if n > 1:
        rows.append(_coalition_row(n, grand, v_grand))
    rows.append(_grand_row(n, grand, v_grand))
    present = {r.tag for r in rows}
    iterations = 0
    while True:
        iterations += 1
        sys = LinSystem(n, tuple(rows))
        outcome = solve(sys)
        if not outcome.feasible:
            return CoreResult(False, certificate=_certificate_from(game, sys),
                              iterations=iterations)
        point = outcome.point
        value, S = max_excess(game, point, engine=engine, nonempty=True, force=force)
        if value <= 0:
            return CoreResult(True, point=point, iterations=iterations)
        if S in present:
            raise AssertionError("separation returned a coalition already in the system")
        present.add(S)
        rows.append(_coalition_row(n, S, game.worth(S)))


# Kernel ----------------------------------------------------------------------

@dataclass(frozen=True)
class KernelVerdict:
    member: bool
    violation: tuple | None = None  # (i, j, s_ij, s_ji): i outweighs j


def _require_imputation(game: Game, x: Sequence[Fraction]) -> None:
    report = is_imputation(game, x)
    if not report:
        raise NotAnImputation("; ".join(report.problems))


def kernel_check(game: Game, x: Sequence[Fraction], engine: str = "auto",
                 force: bool = False) -> KernelVerdict:
    """Member iff no player outweighs another one at ``x``.

    Surpluses are computed as exact maxima, so no search over the worth
    range is needed.
    """
    check_payoff(game, x)
    x = tuple(Fraction(v) for v in x)
    _require_imputation(game, x)
    n = game.n
    engine = resolve_engine(game, engine)
    singles = game.singleton_worths()
    table = ExcessTable(game, x, force) if engine == "enumerate" else None

    def s(i: int, j: int) -> Fraction:
        if table is not None:
            return table.best(1 << i, 1 << j)[0]
        return max_excess(game, x, 1 << i, 1 << j, engine=engine)[0]

    cache = {}
    for j in range(n):
        if x[j] == singles[j]:
            continue  # j is immune to threats
        for i in range(n):
            if i == j:
                continue
            if (i, j) not in cache:
                cache[(i, j)] = s(i, j)
            if (j, i) not in cache:
                cache[(j, i)] = s(j, i)
            if cache[(i, j)] > cache[(j, i)]:
                return KernelVerdict(False, (i, j, cache[(i, j)], cache[(j, i)]))
    return KernelVerdict(True)


# Bargaining set -------------------------------------------------------------------

@dataclass(frozen=True)
class Objection:
    i: int
    j: int
    S: Coalition
    y: tuple  # payoff for the members of S, in increasing player order

    def as_dict(self) -> dict:
        return dict(zip(members(self.S), self.y))


@dataclass(frozen=True)
class ObjectionResult:
    justified: bool
    y: tuple | None = None
    counter: tuple = ()  # coalitions T proving that no justified objection exists


@dataclass(frozen=True)
class BSVerdict:
    member: bool
    justified: Objection | None = None
    witnesses: dict = field(default_factory=dict)
    examined: int = 0


def _objection_system(game: Game, x: tuple, S: Coalition, counters: Sequence[Coalition]):
    """Rows over the variables ``y_k, k ∈ S``; returns ``(system, strict rows)``."""
    idx = list(members(S))
    pos = {k: t for t, k in enumerate(idx)}
    d = len(idx)
    rows = [LinConstraint((1,) * d, EQ, game.worth(S), tag="feasible")]
    for k in idx:
        coeffs = [0] * d
        coeffs[pos[k]] = 1
        rows.append(LinConstraint(tuple(coeffs), GE, x[k], tag=("gain", k)))
    for T in counters:
        coeffs = [0] * d
        for k in members(T & S):
            coeffs[pos[k]] = 1
        rows.append(LinConstraint(tuple(coeffs), GE,
                                  game.worth(T) - payoff_sum(x, T & ~S), tag=("counter", T)))
    return LinSystem(d, tuple(rows)), list(range(1, len(rows)))


def _counter_candidates(game: Game, i: int, j: int) -> Coalition:
    return game.players.grand & ~(1 << i) & ~(1 << j)


def _best_counter(table: ExcessTable, i: int, j: int, S: Coalition, gain: dict) -> tuple:
    """Max over ``T ∋ j, T ∌ i`` of ``v(T) - y(T∩S) - x(T∖S)``.

    ``gain[k] = y_k - x_k`` for ``k ∈ S``; the excess table is at ``x``.
    """
    free = table.game.players.grand & ~(1 << i) & ~(1 << j)
    values = table.values
    jbit = 1 << j
    best_val = best_T = None
    # split T∖{j} into its part inside S and outside S
    inside, outside = free & S, free & ~S
    for a in submasks(inside):
        shift = Fraction(0)
        for k in members(a):
            shift += gain[k]
        for b in submasks(outside):
            T = jbit | a | b
            val = values[T] - shift
            if best_val is None or val > best_val:
                best_val, best_T = val, T
    return best_val, best_T


def justified_objection_exists(game: Game, x: Sequence[Fraction], i: int, j: int,
                               S: Coalition, table: ExcessTable | None = None,
                               force: bool = False) -> ObjectionResult:
    """Does ``i`` have a justified objection against ``j`` through ``S``?

    Decided as nonemptiness of the open region of payoffs ``y`` on ``S``
    with ``y(S) = v(S)``, ``y_k > x_k`` and, for every ``T`` containing ``j``
    but not ``i``, ``v(T) < y(T∩S) + x(T∖S)``.  Counter-coalitions are added
    lazily: a candidate ``y`` is checked against all ``T`` by exhaustive scan
    and the most threatening one joins the system.
    """
    check_payoff(game, x)
    x = tuple(Fraction(v) for v in x)
    if not (S >> i & 1) or S >> j & 1:
        raise BadCoalition("the objecting coalition must contain i and not j")
    if table is None:
        table = ExcessTable(game, x, force)
    if table[S] <= 0:
        return ObjectionResult(False)
    # A counter-coalition disjoint from S with nonnegative excess beats every y.
    free = _counter_candidates(game, i, j) & ~S
    val, T = table.best(1 << j, game.players.grand & ~free & ~(1 << j))
    if val >= 0:
        return ObjectionResult(False, counter=(T,))

    counters = []
    while True:
        sys, strict = _objection_system(game, x, S, counters)
        result = open_feasible(sys, strict)
        if not result:
            return ObjectionResult(False, counter=_minimal_counters(game, x, S, counters))
        y = result.point
        gain = {k: y[t] - x[k] for t, k in enumerate(members(S))}
        val, T = _best_counter(table, i, j, S, gain)
        if val < 0:
            return ObjectionResult(True, y=tuple(y))
        if T in counters:
            raise AssertionError("counter-coalition generated twice")
        counters.append(T)


def _minimal_counters(game, x, S, counters) -> tuple:
    """Drop counter-coalitions while the open region stays empty."""
    kept = list(counters)
    for T in list(kept):
        trial = [U for U in kept if U != T]
        sys, strict = _objection_system(game, x, S, trial)
        if not open_feasible(sys, strict):
            kept = trial
    return tuple(kept)


def verify_justified(game: Game, x: Sequence[Fraction], objection: Objection) -> bool:
    """Check the three conditions for a justified objection by full enumeration."""
    x = tuple(Fraction(v) for v in x)
    S, i, j = objection.S, objection.i, objection.j
    y = dict(zip(members(S), objection.y))
    if not (S >> i & 1) or S >> j & 1:
        return False
    if sum(y.values(), Fraction(0)) != game.worth(S):
        return False
    if any(y[k] <= x[k] for k in y):
        return False
    free = _counter_candidates(game, i, j)
    for sub in submasks(free):
        T = sub | (1 << j)
        offer = sum((y[k] if S >> k & 1 else x[k] for k in members(T)), Fraction(0))
        if game.worth(T) >= offer:
            return False
    return True


def _pair_search(args) -> tuple:
    game, x, i, j, force, collect = args
    table = ExcessTable(game, x, force)
    return _search_pair(game, x, i, j, table, collect)


def _search_pair(game, x, i, j, table, collect) -> tuple:
    witnesses = {}
    examined = 0
    free = game.players.grand & ~(1 << i) & ~(1 << j)
    candidates = [(1 << i) | sub for sub in submasks(free)]
    candidates.sort(key=lambda S: (popcount(S), S))
    for S in candidates:
        if table[S] <= 0:
            continue  # y(S) = v(S) and y > x on S are incompatible
        examined += 1
        res = justified_objection_exists(game, x, i, j, S, table)
        if res.justified:
            return Objection(i, j, S, res.y), witnesses, examined
        if collect:
            witnesses[(i, j, S)] = res.counter
    return None, witnesses, examined


def bargaining_set_check(game: Game, x: Sequence[Fraction], jobs: int = 1,
                         collect_witnesses: bool = False, force: bool = False,
                         objector: int | None = None, target: int | None = None) -> BSVerdict:
    """Member iff no player has a justified objection against another.

    Pairs ``(i, j)`` are scanned lexicographically and coalitions by
    increasing size, so the reported objection is deterministic.  Passing
    ``objector`` and/or ``target`` restricts the scan to those pairs; the
    verdict then only speaks for them.
    """
    check_payoff(game, x)
    x = tuple(Fraction(v) for v in x)
    _require_imputation(game, x)
    check_enumerable(game.n, force)
    n = game.n
    singles = game.singleton_worths()
    # x_j = v({j}) lets j answer any objection with the singleton {j}
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j and x[j] != singles[j]
             and objector in (None, i) and target in (None, j)]
    witnesses = {}
    examined = 0
    if jobs > 1 and len(pairs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(_pair_search,
                               [(game, x, i, j, force, collect_witnesses) for i, j in pairs])
            for objection, wit, count in results:
                witnesses.update(wit)
                examined += count
                if objection is not None:
                    return BSVerdict(False, objection, witnesses, examined)
        return BSVerdict(True, None, witnesses, examined)
    table = ExcessTable(game, x, force)
    for i, j in pairs:
        objection, wit, count = _search_pair(game, x, i, j, table, collect_witnesses)
        witnesses.update(wit)
        examined += count
        if objection is not None:
            return BSVerdict(False, objection, witnesses, examined)
    return BSVerdict(True, None, witnesses, examined)

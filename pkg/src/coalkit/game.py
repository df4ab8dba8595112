"""Players, coalitions, payoffs and the representation-independent quantities.

Coalitions are plain ``int`` bitsets: bit ``k`` set means player ``k`` is a
member.  Every worth, weight and payoff is a :class:`fractions.Fraction`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import EngineUnsupported, InputError, TooManyPlayers

MAX_PLAYERS = 64
DEFAULT_ENUMERATION_CAP = 30
TABLE_CAP = 22

Coalition = int
Payoff = tuple  # tuple[Fraction, ...], indexed by player


def enumeration_cap() -> int:
    """Largest player count the exhaustive engines accept without ``force``."""
    raw = os.environ.get("COALKIT_MAX_PLAYERS")
    if raw is None:
        return DEFAULT_ENUMERATION_CAP
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"COALKIT_MAX_PLAYERS must be an integer, got {raw!r}")


def check_enumerable(n: int, force: bool = False) -> None:
    if not force and n > enumeration_cap():
        raise TooManyPlayers(
            f"exhaustive enumeration over {n} players refused "
            f"(cap {enumeration_cap()}; pass force=True or set COALKIT_MAX_PLAYERS)")


def parse_rational(value) -> Fraction:
    """Parse ``"p"``, ``"p/q"`` (or an int) into a Fraction.

    Floats are rejected: they would silently smuggle binary rounding into
    an exact computation.
    """
    if isinstance(value, bool):
        raise InputError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text or any(ch in text for ch in ".eE"):
            raise InputError(f"not a rational string: {value!r}")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise InputError(f"not a rational string: {value!r}")
    raise InputError(f"not a rational: {value!r}")


def format_rational(q: Fraction) -> str:
    return str(Fraction(q))


def popcount(S: Coalition) -> int:
    return bin(S).count("1")


def members(S: Coalition) -> Iterator[int]:
    """Yield player indices of ``S`` in increasing order."""
    k = 0
    while S:
        if S & 1:
            yield k
        S >>= 1
        k += 1


def coalition_of(indices: Iterable[int]) -> Coalition:
    S = 0
    for k in indices:
        S |= 1 << k
    return S


def submasks(mask: Coalition) -> Iterator[Coalition]:
    """All subsets of ``mask`` in increasing numeric order (including 0)."""
    # Walk the complement-trick enumeration upward so ties resolve toward
    # numerically smaller coalitions.
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = (sub - mask) & mask


@dataclass(frozen=True)
class PlayerSet:
    names: tuple

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise InputError("a game needs at least one player")
        if len(names) > MAX_PLAYERS:
            raise TooManyPlayers(f"{len(names)} players exceed the {MAX_PLAYERS}-player limit")
        for name in names:
            if not isinstance(name, str) or not name or "," in name:
                raise InputError(f"invalid player name {name!r}")
        if len(set(names)) != len(names):
            raise InputError("duplicate player names")

    @cached_property
    def index(self) -> dict:
        return {name: k for k, name in enumerate(self.names)}

    def __len__(self) -> int:
        return len(self.names)

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def grand(self) -> Coalition:
        return (1 << len(self.names)) - 1

    def idx(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise InputError(f"unknown player {name!r}")

    def coalition(self, names: Iterable[str]) -> Coalition:
        S = 0
        for name in names:
            S |= 1 << self.idx(name)
        return S

    def parse_coalition(self, text: str) -> Coalition:
        """Parse ``"a,b,d"``; the empty string is the empty coalition."""
        text = text.strip()
        if not text:
            return 0
        return self.coalition(part.strip() for part in text.split(","))

    def names_of(self, S: Coalition) -> list:
        return [self.names[k] for k in members(S)]

    def format_coalition(self, S: Coalition) -> str:
        return ",".join(self.names_of(S))


class Game:
    """A TU game exposing a deterministic worth oracle over bitset coalitions.

    Subclasses implement :meth:`worth`.  ``v(0) == 0`` for every built-in
    representation.
    """

    players: PlayerSet

    @property
    def n(self) -> int:
        return self.players.n

    def worth(self, S: Coalition) -> Fraction:
        raise NotImplementedError

    def worth_table(self) -> list:
        """All ``2**n`` worths indexed by coalition; cached per instance."""
        cached = self.__dict__.get("_worth_table")
        if cached is None:
            if self.n > TABLE_CAP:
                raise TooManyPlayers(f"worth table for {self.n} players is too large")
            cached = self._build_worth_table()
            self.__dict__["_worth_table"] = cached
        return cached

    def _build_worth_table(self) -> list:
        return [self.worth(S) for S in range(1 << self.n)]

    def singleton_worths(self) -> list:
        return [self.worth(1 << k) for k in range(self.n)]


def payoff_sum(x: Sequence[Fraction], S: Coalition) -> Fraction:
    total = Fraction(0)
    for k in members(S):
        total += x[k]
    return total


def make_payoff(values: Iterable) -> Payoff:
    return tuple(Fraction(v) for v in values)


def check_payoff(game: Game, x: Sequence) -> None:
    if len(x) != game.n:
        raise InputError(f"payoff has {len(x)} entries, game has {game.n} players")


def excess(game: Game, S: Coalition, x: Sequence[Fraction]) -> Fraction:
    """``v(S) - x(S)``: how dissatisfied coalition ``S`` is at ``x``."""
    return game.worth(S) - payoff_sum(x, S)


@dataclass(frozen=True)
class ImputationReport:
    ok: bool
    problems: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def is_imputation(game: Game, x: Sequence[Fraction]) -> ImputationReport:
    """Efficiency plus individual rationality, with diagnostics."""
    check_payoff(game, x)
    problems = []
    total = sum(x, Fraction(0))
    grand = game.worth(game.players.grand)
    if total != grand:
        problems.append(f"inefficient: x(N) = {total} != v(N) = {grand}")
    for k, vk in enumerate(game.singleton_worths()):
        if x[k] < vk:
            problems.append(
                f"not individually rational: x[{game.players.names[k]}] = {x[k]} < {vk}")
    return ImputationReport(not problems, tuple(problems))


class ExcessTable:
    """Excess of every coalition at a fixed payoff, for exhaustive scans."""

    def __init__(self, game: Game, x: Sequence[Fraction], force: bool = False):
        check_enumerable(game.n, force)
        check_payoff(game, x)
        self.game = game
        self.x = tuple(Fraction(v) for v in x)
        worths = game.worth_table()
        size = 1 << game.n
        xs = [Fraction(0)] * size
        for S in range(1, size):
            low = S & -S
            xs[S] = xs[S ^ low] + self.x[low.bit_length() - 1]
        self.values = [worths[S] - xs[S] for S in range(size)]

    def __getitem__(self, S: Coalition) -> Fraction:
        return self.values[S]

    def best(self, include: Coalition = 0, exclude: Coalition = 0,
             nonempty: bool = False) -> tuple:
        """Max excess over ``S ⊇ include`` with ``S ∩ exclude = ∅``.

        Returns ``(value, S)``; ties go to the numerically smallest ``S``.
        """
        if include & exclude:
            raise ValueError("include and exclude overlap")
        free = self.game.players.grand & ~include & ~exclude
        values = self.values
        best_val = None
        best_S = None
        for sub in submasks(free):
            S = include | sub
            if nonempty and not S:
                continue
            val = values[S]
            if best_val is None or val > best_val:
                best_val, best_S = val, S
        return best_val, best_S


def max_excess_enumerate(game: Game, x: Sequence[Fraction], include: Coalition = 0,
                         exclude: Coalition = 0, nonempty: bool = False,
                         force: bool = False) -> tuple:
    """Exhaustive constrained max excess; ``(value, coalition)``."""
    check_enumerable(game.n, force)
    if game.n <= TABLE_CAP:
        return ExcessTable(game, x, force=True).best(include, exclude, nonempty)
    if include & exclude:
        raise ValueError("include and exclude overlap")
    free = game.players.grand & ~include & ~exclude
    best_val = best_S = None
    for sub in submasks(free):
        S = include | sub
        if nonempty and not S:
            continue
        val = excess(game, S, x)
        if best_val is None or val > best_val:
            best_val, best_S = val, S
    return best_val, best_S


ENGINES = ("enumerate", "treewidth-dp", "auto")


def resolve_engine(game: Game, engine: str) -> str:
    """Map ``auto`` to a concrete engine and validate explicit choices."""
    from .representations import GraphGame

    if engine not in ENGINES:
        raise InputError(f"unknown engine {engine!r}")
    if engine == "treewidth-dp":
        if not isinstance(game, GraphGame):
            raise EngineUnsupported(
                f"treewidth-dp needs a graph game, got {type(game).__name__}")
        return engine
    if engine == "auto":
        if isinstance(game, GraphGame) and game.heuristic_width() <= 8:
            return "treewidth-dp"
        return "enumerate"
    return engine


def max_excess(game: Game, x: Sequence[Fraction], include: Coalition = 0,
               exclude: Coalition = 0, engine: str = "auto", nonempty: bool = False,
               force: bool = False) -> tuple:
    """Constrained max excess through the chosen engine: ``(value, S)``."""
    engine = resolve_engine(game, engine)
    if engine == "treewidth-dp":
        from .treewidth import max_excess_constrained_argmax

        val, S = max_excess_constrained_argmax(game, x, include, exclude,
                                               game.decomposition())
        if nonempty and S == 0:
            # The DP may settle on the empty coalition; rerun the scan over
            # each forced member to honour the nonempty request.
            best = None
            for k in range(game.n):
                if exclude >> k & 1:
                    continue
                cand = max_excess_constrained_argmax(
                    game, x, include | (1 << k), exclude, game.decomposition())
                if best is None or cand[0] > best[0]:
                    best = cand
            return best if best is not None else (None, None)
        return val, S
    return max_excess_enumerate(game, x, include, exclude, nonempty, force)


def surplus(game: Game, i: int, j: int, x: Sequence[Fraction], engine: str = "auto",
            force: bool = False) -> Fraction:
    """Max excess over coalitions containing ``i`` but not ``j``."""
    if i == j:
        raise ValueError("surplus needs two distinct players")
    check_payoff(game, x)
    value, _ = max_excess(game, x, include=1 << i, exclude=1 << j,
                          engine=engine, force=force)
    return value

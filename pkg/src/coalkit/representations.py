"""Compact game representations: graph games, MC-nets and explicit tables.

All three implement :class:`coalkit.game.Game`.  Games are immutable after
construction; the JSON helpers at the bottom give a canonical serialization
so that ``load_game(dump_game(g)) == g``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import InputError, TooManyPlayers
from .game import (Coalition, Game, PlayerSet, format_rational, members,
                   parse_rational)

EXPLICIT_CAP = 20


@dataclass(frozen=True, eq=True)
class GraphGame(Game):
    """``v(S)`` is the total weight of edges with both endpoints in ``S``."""

    players: PlayerSet
    edges: tuple  # ((i, j, weight), ...) with i < j, sorted

    def __post_init__(self):
        n = self.players.n
        canon = []
        seen = set()
        for edge in self.edges:
            try:
                i, j, w = edge
            except (TypeError, ValueError):
                raise InputError(f"edge must be (i, j, weight), got {edge!r}")
            if not (isinstance(i, int) and isinstance(j, int)) or not (0 <= i < n and 0 <= j < n):
                raise InputError(f"edge endpoint out of range: {edge!r}")
            if i == j:
                raise InputError(f"self-loop on player {self.players.names[i]!r}")
            if i > j:
                i, j = j, i
            if (i, j) in seen:
                raise InputError(
                    f"duplicate edge {{{self.players.names[i]}, {self.players.names[j]}}}")
            seen.add((i, j))
            canon.append((i, j, Fraction(w)))
        canon.sort(key=lambda e: (e[0], e[1]))
        object.__setattr__(self, "edges", tuple(canon))

    @classmethod
    def from_names(cls, names, edges) -> "GraphGame":
        ps = PlayerSet(tuple(names))
        return cls(ps, tuple((ps.idx(a), ps.idx(b), parse_rational(w)) for a, b, w in edges))

    @cached_property
    def adjacency(self) -> tuple:
        adj = [[] for _ in range(self.players.n)]
        for i, j, w in self.edges:
            adj[i].append((j, w))
            adj[j].append((i, w))
        return tuple(tuple(a) for a in adj)

    def weight(self, i: int, j: int) -> Fraction:
        if i > j:
            i, j = j, i
        for a, b, w in self.edges:
            if a == i and b == j:
                return w
        raise KeyError((i, j))

    def worth(self, S: Coalition) -> Fraction:
        total = Fraction(0)
        for i, j, w in self.edges:
            if S >> i & 1 and S >> j & 1:
                total += w
        return total

    def _build_worth_table(self) -> list:
        # v(S) = v(S - low) + weight from low into the rest of S.
        size = 1 << self.players.n
        table = [Fraction(0)] * size
        adj = self.adjacency
        for S in range(1, size):
            low = S & -S
            k = low.bit_length() - 1
            rest = S ^ low
            gain = Fraction(0)
            for u, w in adj[k]:
                if rest >> u & 1:
                    gain += w
            table[S] = table[rest] + gain
        return table

    def decomposition(self, method: str = "min-fill"):
        """Cached tree decomposition of the underlying graph."""
        cache = self.__dict__.setdefault("_decompositions", {})
        if method not in cache:
            from .treewidth import decompose

            cache[method] = decompose(self, method)
        return cache[method]

    def heuristic_width(self) -> int:
        return self.decomposition().width


@dataclass(frozen=True, eq=True)
class MCNet(Game):
    """Rule ``(pos, neg, value)`` contributes ``value`` to every coalition
    containing all of ``pos`` and none of ``neg``."""

    players: PlayerSet
    rules: tuple  # ((pos, neg, value), ...)

    def __post_init__(self):
        grand = self.players.grand
        canon = []
        for rule in self.rules:
            try:
                pos, neg, value = rule
            except (TypeError, ValueError):
                raise InputError(f"rule must be (pos, neg, value), got {rule!r}")
            if pos & ~grand or neg & ~grand or pos < 0 or neg < 0:
                raise InputError("rule mentions an unknown player")
            if pos & neg:
                raise InputError("rule has a player both positive and negative")
            if not (pos | neg):
                raise InputError("rule with an empty pattern")
            canon.append((pos, neg, Fraction(value)))
        object.__setattr__(self, "rules", tuple(canon))

    @classmethod
    def from_names(cls, names, rules) -> "MCNet":
        ps = PlayerSet(tuple(names))
        return cls(ps, tuple((ps.coalition(p), ps.coalition(q), parse_rational(v))
                             for p, q, v in rules))

    def worth(self, S: Coalition) -> Fraction:
        total = Fraction(0)
        for pos, neg, value in self.rules:
            if pos & S == pos and not neg & S:
                total += value
        return total


@dataclass(frozen=True, eq=True)
class ExplicitGame(Game):
    """Full worth table; the brute-force reference representation."""

    players: PlayerSet
    worths: tuple  # indexed by coalition bitset, length 2**n

    def __post_init__(self):
        n = self.players.n
        if n > EXPLICIT_CAP:
            raise TooManyPlayers(f"explicit games are limited to {EXPLICIT_CAP} players")
        worths = tuple(Fraction(w) for w in self.worths)
        if len(worths) != 1 << n:
            raise InputError(f"explicit table needs {1 << n} entries, got {len(worths)}")
        if worths[0] != 0:
            raise InputError("the empty coalition must have worth 0")
        object.__setattr__(self, "worths", worths)

    @classmethod
    def from_function(cls, names, fn) -> "ExplicitGame":
        ps = PlayerSet(tuple(names))
        return cls(ps, tuple(Fraction(0) if S == 0 else Fraction(fn(S))
                             for S in range(1 << ps.n)))

    def worth(self, S: Coalition) -> Fraction:
        return self.worths[S]

    def _build_worth_table(self) -> list:
        return list(self.worths)


def gg_to_mcn(g: GraphGame) -> MCNet:
    """One ``{i ∧ j} -> w`` rule per edge; worth-equivalent on every coalition."""
    return MCNet(g.players, tuple(((1 << i) | (1 << j), 0, w) for i, j, w in g.edges))


def to_explicit(game: Game, players: PlayerSet | None = None) -> ExplicitGame:
    players = players or game.players
    if players.n > EXPLICIT_CAP:
        raise TooManyPlayers(f"cannot materialize {players.n} players (cap {EXPLICIT_CAP})")
    if players != game.players:
        raise InputError("player set does not match the game")
    table = [Fraction(0)] + [game.worth(S) for S in range(1, 1 << players.n)]
    return ExplicitGame(players, tuple(table))


# JSON format -----------------------------------------------------------------

def load_game(obj) -> Game:
    """Build a game from the parsed JSON game object."""
    if not isinstance(obj, dict):
        raise InputError("game file must hold a JSON object")
    try:
        names = obj["players"]
        rep = obj["repr"]
        kind = rep["type"]
    except (KeyError, TypeError):
        raise InputError('game object needs "players" and "repr" with a "type"')
    if not isinstance(names, list):
        raise InputError('"players" must be a list of names')
    players = PlayerSet(tuple(names))
    if kind == "graph":
        edges = []
        for entry in rep.get("edges", []):
            if not isinstance(entry, list) or len(entry) != 3:
                raise InputError(f"edge entry must be [a, b, weight], got {entry!r}")
            a, b, w = entry
            edges.append((players.idx(a), players.idx(b), parse_rational(w)))
        return GraphGame(players, tuple(edges))
    if kind == "mcnet":
        rules = []
        for entry in rep.get("rules", []):
            if not isinstance(entry, dict) or "value" not in entry:
                raise InputError(f"rule must be an object with pos/neg/value, got {entry!r}")
            rules.append((players.coalition(entry.get("pos", [])),
                          players.coalition(entry.get("neg", [])),
                          parse_rational(entry["value"])))
        return MCNet(players, tuple(rules))
    if kind == "explicit":
        if players.n > EXPLICIT_CAP:
            raise TooManyPlayers(f"explicit games are limited to {EXPLICIT_CAP} players")
        table = [None] * (1 << players.n)
        table[0] = Fraction(0)
        for key, value in rep.get("worths", {}).items():
            S = players.parse_coalition(key)
            if key.strip() and len(key.split(",")) != bin(S).count("1"):
                raise InputError(f"repeated player in coalition key {key!r}")
            if S == 0:
                if parse_rational(value) != 0:
                    raise InputError("the empty coalition must have worth 0")
                continue
            if table[S] is not None:
                raise InputError(f"coalition {key!r} listed twice")
            table[S] = parse_rational(value)
        # omitted coalitions are worth 0
        return ExplicitGame(players, tuple(Fraction(0) if w is None else w for w in table))
    raise InputError(f"unknown representation type {kind!r}")


def dump_game(game: Game) -> dict:
    """Canonical JSON object for ``game``."""
    ps = game.players
    names = list(ps.names)
    if isinstance(game, GraphGame):
        rep = {"type": "graph",
               "edges": [[names[i], names[j], format_rational(w)] for i, j, w in game.edges]}
    elif isinstance(game, MCNet):
        rep = {"type": "mcnet",
               "rules": [{"pos": ps.names_of(p), "neg": ps.names_of(q),
                          "value": format_rational(v)} for p, q, v in game.rules]}
    elif isinstance(game, ExplicitGame):
        rep = {"type": "explicit",
               "worths": {ps.format_coalition(S): format_rational(game.worths[S])
                          for S in range(1, 1 << ps.n)}}
    else:
        raise InputError(f"cannot serialize {type(game).__name__}")
    return {"players": names, "repr": rep}


def dumps_game(game: Game) -> str:
    return json.dumps(dump_game(game), sort_keys=True, separators=(",", ":"))


def game_digest(game: Game) -> str:
    return hashlib.sha256(dumps_game(game).encode()).hexdigest()[:16]


def coalition_names(game: Game, S: Coalition) -> list:
    return [game.players.names[k] for k in members(S)]

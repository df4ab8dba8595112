"""Small hand-built games shared across the tests."""

from fractions import Fraction
from pathlib import Path

from coalkit import ExplicitGame, GraphGame, MCNet

DATA = Path(__file__).parent / "data"


def four_node_graph() -> GraphGame:
    # ab=2, ad=3, bd=-1 fix v({a,b})=2 and v({a,b,d})=4; ac, cd are free choices
    return GraphGame.from_names("abcd", [("a", "b", "2"), ("a", "d", "3"), ("b", "d", "-1"),
                                         ("a", "c", "1"), ("c", "d", "4")])


def two_player_net() -> MCNet:
    return MCNet.from_names("ab", [("ab", "", "5"), ("b", "", "2"), ("a", "b", "3")])


def three_player(grand="42") -> ExplicitGame:
    pairs = {0b011: 20, 0b101: 30, 0b110: 40, 0b111: Fraction(grand)}
    return ExplicitGame.from_function("abc", lambda S: pairs.get(S, 0))


def xs(*values):
    return tuple(Fraction(v) for v in values)

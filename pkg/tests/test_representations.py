import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from coalkit import ExplicitGame, GraphGame, MCNet, dump_game, gg_to_mcn, load_game, to_explicit
from coalkit.errors import InputError, TooManyPlayers
from coalkit.game import PlayerSet
from coalkit.representations import dumps_game, game_digest
from games import DATA, four_node_graph, three_player, two_player_net
from oracles import random_graph_edges


def test_graph_worths():
    g = four_node_graph()
    ps = g.players
    assert g.worth(ps.coalition("ab")) == 2
    assert g.worth(ps.coalition("abd")) == 4
    assert all(g.worth(1 << k) == 0 for k in range(4))


def test_mcnet_worths():
    m = two_player_net()
    assert [m.worth(S) for S in range(4)] == [0, 3, 2, 7]


def test_translation_four_node():
    g = four_node_graph()
    m = gg_to_mcn(g)
    assert len(m.rules) == 5
    assert m.worth(g.players.coalition("abd")) == 4


def test_translation_empty():
    g = GraphGame(PlayerSet(("a", "b")), ())
    m = gg_to_mcn(g)
    assert m.rules == () and all(m.worth(S) == 0 for S in range(4))


@pytest.mark.parametrize("seed", range(5))
def test_translation_exhaustive(seed):
    rng = random.Random(seed)
    n = 10 if seed < 3 else 12
    g = GraphGame(PlayerSet(tuple(f"p{k}" for k in range(n))),
                  tuple(random_graph_edges(rng, n, 0.4)))
    m = gg_to_mcn(g)
    assert len(m.rules) == len(g.edges)
    for S in range(1 << n):
        assert g.worth(S) == m.worth(S)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_rule_order_irrelevant(seed):
    rng = random.Random(seed)
    names = "abcde"
    rules = []
    for _ in range(rng.randint(1, 6)):
        pos = rng.randint(0, 31)
        neg = rng.randint(0, 31) & ~pos
        if not pos | neg:
            pos = 1
        rules.append((pos, neg, Fraction(rng.randint(-9, 9), rng.randint(1, 3))))
    ps = PlayerSet(tuple(names))
    shuffled = rules[:]
    rng.shuffle(shuffled)
    a, b = MCNet(ps, tuple(rules)), MCNet(ps, tuple(shuffled))
    assert a.worth_table() == b.worth_table()


def test_to_explicit():
    e = to_explicit(four_node_graph())
    assert len(e.worths) == 16 and e.worths[0b1011] == 4
    assert to_explicit(two_player_net()).worths == tuple(map(Fraction, (0, 3, 2, 7)))
    g = three_player()
    assert to_explicit(g) == g


def test_to_explicit_cap():
    big = GraphGame(PlayerSet(tuple(f"p{k}" for k in range(21))), ())
    with pytest.raises(TooManyPlayers):
        to_explicit(big)


@pytest.mark.parametrize("edges", [
    [("a", "b", "1"), ("b", "a", "2")],
    [("a", "a", "1")],
])
def test_graph_rejects_bad_edges(edges):
    with pytest.raises(InputError):
        GraphGame.from_names("ab", edges)


def test_mcnet_rejects_bad_rules():
    with pytest.raises(InputError):
        MCNet.from_names("ab", [("a", "a", "1")])
    with pytest.raises(InputError):
        MCNet.from_names("ab", [("", "", "1")])


def test_explicit_needs_zero_empty_worth():
    with pytest.raises(InputError):
        ExplicitGame(PlayerSet(("a",)), (Fraction(1), Fraction(0)))


def test_edges_canonicalized():
    g1 = GraphGame.from_names("abc", [("c", "a", "1"), ("b", "a", "2")])
    g2 = GraphGame.from_names("abc", [("a", "b", "2"), ("a", "c", "1")])
    assert g1 == g2 and game_digest(g1) == game_digest(g2)


@pytest.mark.parametrize("make", [four_node_graph, two_player_net, three_player])
def test_json_round_trip(make):
    g = make()
    text = dumps_game(g)
    again = load_game(json.loads(text))
    assert again == g and dumps_game(again) == text


def test_fixture_files_load():
    assert load_game(json.loads((DATA / "graph4.json").read_text())) == four_node_graph()
    assert load_game(json.loads((DATA / "mcnet.json").read_text())) == two_player_net()
    assert load_game(json.loads((DATA / "three42.json").read_text())) == three_player()


def test_sparse_explicit_defaults_to_zero():
    obj = {"players": ["a", "b", "c"],
           "repr": {"type": "explicit", "worths": {"a,b": "20", "a,c": "30", "b,c": "40",
                                                    "a,b,c": "42"}}}
    assert load_game(obj) == three_player()


@pytest.mark.parametrize("obj", [
    {"players": ["a"]},
    {"players": "ab", "repr": {"type": "graph"}},
    {"players": ["a", "b"], "repr": {"type": "graph", "edges": [["a", "b", "1.5"]]}},
    {"players": ["a", "b"], "repr": {"type": "graph", "edges": [["a", "z", "1"]]}},
    {"players": ["a", "b"], "repr": {"type": "explicit", "worths": {"a,a": "1"}}},
    {"players": ["a", "b"], "repr": {"type": "explicit", "worths": {"": "1"}}},
    {"players": ["a", "b"], "repr": {"type": "tree"}},
    {"players": ["a", "b"], "repr": {"type": "mcnet", "rules": [{"pos": ["a"]}]}},
])
def test_load_rejects(obj):
    with pytest.raises(InputError):
        load_game(obj)


def test_dump_shape():
    d = dump_game(four_node_graph())
    assert d["repr"]["type"] == "graph"
    assert ["a", "b", "2"] in d["repr"]["edges"]

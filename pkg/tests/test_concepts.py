import random
from fractions import Fraction

import pytest

from coalkit import (ExplicitGame, GraphGame, Objection, bargaining_set_check, core_check,
                     core_nonempty, excess, justified_objection_exists, kernel_check,
                     verify_justified)
from coalkit.errors import BadCoalition, NotAnImputation
from coalkit.game import PlayerSet
from games import three_player, xs
from nucleolus import nucleolus
from oracles import brute_bargaining_set, brute_justified, random_explicit_worths

A, B, C = 0, 1, 2


def explicit(worths):
    n = len(worths).bit_length() - 1
    return ExplicitGame(PlayerSet(tuple("abcdefgh"[:n])), tuple(worths))


def imputable_worths(rng, n):
    worths = random_explicit_worths(rng, n)
    singles = sum(worths[1 << k] for k in range(n))
    grand = (1 << n) - 1
    if worths[grand] < singles:
        worths[grand] = singles + rng.randint(0, 10)
    return worths


def random_imputation(rng, worths, n):
    grand = (1 << n) - 1
    spare = worths[grand] - sum(worths[1 << k] for k in range(n))
    cuts = [Fraction(rng.randint(0, 6)) for _ in range(n)]
    total = sum(cuts) or Fraction(1)
    if sum(cuts) == 0:
        cuts[0] = Fraction(1)
    return tuple(worths[1 << k] + spare * c / total for k, c in enumerate(cuts))


# core ------------------------------------------------------------------------------

def test_core_check_blocking_pair():
    g = three_player()
    v = core_check(g, xs(4, 14, 24))
    assert not v.member and v.deficit == 2
    assert excess(g, v.blocking, xs(4, 14, 24)) == 2
    assert excess(g, 0b110, xs(4, 14, 24)) == 2  # {b,c} also blocks by 2


def test_core_check_members():
    assert core_check(three_player("45"), xs(5, 15, 25)).member
    solo = ExplicitGame.from_function("a", lambda S: 0)
    assert core_check(solo, xs(0)).member


def test_core_check_inefficient():
    v = core_check(three_player("45"), xs(5, 15, 20))
    assert not v.member


@pytest.mark.parametrize("mode", ["constraint-generation", "full-lp"])
def test_core_nonempty_small(mode):
    empty = core_nonempty(three_player(), mode=mode)
    assert not empty.nonempty
    assert set(empty.certificate.coalitions) == {0b011, 0b101, 0b110}
    assert empty.certificate.verify(3)
    full = core_nonempty(three_player("45"), mode=mode)
    assert full.nonempty and core_check(three_player("45"), full.point).member
    additive = ExplicitGame.from_function("abcd", lambda S: bin(S).count("1"))
    res = core_nonempty(additive, mode=mode)
    assert res.nonempty and res.point == xs(1, 1, 1, 1)


def test_core_modes_agree_and_certificates_bounded():
    rng = random.Random(21)
    empties = 0
    for _ in range(40):
        n = rng.randint(2, 5)
        g = explicit(random_explicit_worths(rng, n))
        a = core_nonempty(g, mode="constraint-generation")
        b = core_nonempty(g, mode="full-lp")
        assert a.nonempty == b.nonempty
        for res in (a, b):
            if res.nonempty:
                assert core_check(g, res.point).member
            else:
                empties += 1
                cert = res.certificate
                assert len(cert.coalitions) <= n and cert.verify(n)
                assert cert.worths == tuple(g.worth(S) for S in cert.coalitions)
    assert empties > 0


def test_core_on_graph_engines_agree():
    rng = random.Random(8)
    for _ in range(10):
        n = rng.randint(3, 9)
        ps = PlayerSet(tuple(f"p{k}" for k in range(n)))
        edges = [(i, j, Fraction(rng.randint(-6, 9))) for i in range(n) for j in range(i + 1, n)
                 if rng.random() < 0.4]
        g = GraphGame(ps, tuple(edges))
        r1 = core_nonempty(g, engine="enumerate")
        r2 = core_nonempty(g, engine="treewidth-dp")
        assert r1.nonempty == r2.nonempty


# kernel ----------------------------------------------------------------------------

def test_kernel_member():
    assert kernel_check(three_player(), xs(4, 14, 24)).member
    solo = ExplicitGame.from_function("a", lambda S: 3)
    assert kernel_check(solo, xs(3)).member


def test_kernel_violation_reported():
    g = three_player()
    v = kernel_check(g, xs(8, 10, 24))
    assert not v.member
    i, j, sij, sji = v.violation
    assert sij > sji


def test_kernel_rejects_non_imputation():
    with pytest.raises(NotAnImputation):
        kernel_check(three_player(), xs(0, 0, 0))


# bargaining set -----------------------------------------------------------------------

def test_objection_c_against_a():
    g = three_player()
    x = xs(8, 10, 24)
    res = justified_objection_exists(g, x, C, A, 0b110)
    assert res.justified
    assert verify_justified(g, x, Objection(C, A, 0b110, res.y))
    # the hand-made payoff (14, 26) is also justified
    assert verify_justified(g, x, Objection(C, A, 0b110, xs(14, 26)))


def test_objection_a_against_c_fails():
    g = three_player()
    res = justified_objection_exists(g, xs(4, 14, 24), A, C, 0b011)
    assert not res.justified
    assert res.counter and len(res.counter) <= 3


def test_objection_pruned_when_no_surplus():
    g = three_player()
    # v({a,b}) = 20 <= x(a,b) = 22
    assert not justified_objection_exists(g, xs(8, 14, 20), A, C, 0b011).justified


def test_objection_bad_coalition():
    with pytest.raises(BadCoalition):
        justified_objection_exists(three_player(), xs(4, 14, 24), A, C, 0b110)


def test_bargaining_set_examples():
    g = three_player()
    out = bargaining_set_check(g, xs(8, 10, 24))
    assert not out.member
    assert verify_justified(g, xs(8, 10, 24), out.justified)
    assert out.justified.S == 0b110 and out.justified.j == A
    only_c = bargaining_set_check(g, xs(8, 10, 24), objector=C, target=A)
    assert not only_c.member and only_c.justified.i == C
    assert bargaining_set_check(g, xs(4, 14, 24)).member


def test_bargaining_set_rejects_non_imputation():
    with pytest.raises(NotAnImputation):
        bargaining_set_check(three_player(), xs(40, 1, 0))


def test_bargaining_set_matches_brute_force():
    rng = random.Random(17)
    verdicts = set()
    for _ in range(60):
        n = rng.randint(2, 4)
        worths = imputable_worths(rng, n)
        g = explicit(worths)
        x = random_imputation(rng, worths, n)
        got = bargaining_set_check(g, x)
        assert got.member == brute_bargaining_set(lambda S: worths[S], n, x)
        if not got.member:
            assert verify_justified(g, x, got.justified)
        verdicts.add(got.member)
    assert verdicts == {True, False}


def test_objection_verdicts_match_brute_force():
    rng = random.Random(4)
    for _ in range(40):
        n = rng.randint(2, 4)
        worths = imputable_worths(rng, n)
        g = explicit(worths)
        x = random_imputation(rng, worths, n)
        i, j = rng.sample(range(n), 2)
        S = (rng.randint(0, (1 << n) - 1) | 1 << i) & ~(1 << j)
        res = justified_objection_exists(g, x, i, j, S)
        assert res.justified == brute_justified(lambda T: worths[T], n, x, i, j, S)
        if res.justified:
            assert verify_justified(g, x, Objection(i, j, S, res.y))


def test_core_members_have_no_objections():
    rng = random.Random(31)
    seen = 0
    for _ in range(60):
        n = rng.randint(2, 5)
        g = explicit(imputable_worths(rng, n))
        res = core_nonempty(g)
        if not res.nonempty:
            continue
        seen += 1
        x = res.point
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                for S in range(1 << n):
                    if S >> i & 1 and not S >> j & 1:
                        assert not justified_objection_exists(g, x, i, j, S).justified
    assert seen >= 5


def test_nucleolus_points_in_kernel_and_bargaining_set():
    rng = random.Random(12)
    for _ in range(15):
        n = rng.randint(2, 5)
        worths = imputable_worths(rng, n)
        g = explicit(worths)
        x = nucleolus(worths, n)
        assert kernel_check(g, x).member
        assert bargaining_set_check(g, x).member


def test_jobs_do_not_change_verdicts():
    rng = random.Random(77)
    for _ in range(6):
        n = rng.randint(3, 5)
        worths = imputable_worths(rng, n)
        g = explicit(worths)
        x = random_imputation(rng, worths, n)
        one = bargaining_set_check(g, x, jobs=1)
        two = bargaining_set_check(g, x, jobs=3)
        assert one.member == two.member and one.justified == two.justified


def test_collected_witnesses_verify():
    g = three_player()
    out = bargaining_set_check(g, xs(8, 10, 24), collect_witnesses=True)
    assert out.witnesses
    for objection in out.witnesses.values():
        if isinstance(objection, Objection):
            assert verify_justified(g, xs(8, 10, 24), objection)

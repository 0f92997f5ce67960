import pytest

import audreg

OVERLAP = """object 0 initial 0 writer 0 readers 1 auditors 0,3
0 0 0 0 inv write 1 -
1 0 0 0 res write - -
2 1 0 1 inv read - -
3 0 0 2 inv write 2 -
4 0 0 2 res write - -
5 3 0 3 inv audit - -
6 3 0 3 res audit - {audit}
7 1 0 1 res read - 1
"""


def test_check_separates_definitions():
    empty = OVERLAP.format(audit="{}")
    reported = OVERLAP.format(audit="{(1,1)}")
    assert audreg.check(reported, 1).accepted
    v = audreg.check(empty, 1)
    assert not v.accepted
    assert v.condition == "completeness"
    assert v.ops == [3]
    assert audreg.check(empty, 2).accepted
    assert audreg.oracle(empty, 2).accepted == audreg.check(empty, 2).accepted


def test_parse_errors_raise():
    with pytest.raises(audreg.InputError):
        audreg.check("0 0 0 0 inv wr", 1)
    with pytest.raises(ValueError):
        audreg.check(OVERLAP.format(audit="{}"), 3)


def test_run_is_deterministic():
    a = audreg.run("a5", "large", seed=42)
    assert a == audreg.run("a5", "large", seed=42)
    assert audreg.check(a, 1).accepted
    with pytest.raises(audreg.UsageError):
        audreg.run("a9")


def test_explore_and_mutant():
    ok = audreg.explore("a3")
    assert ok["schedules"] == 20 and ok["rejected"] == 0
    bad = audreg.explore("a4-mutant-nobitreset")
    assert bad["rejected"] == 1
    assert not audreg.check(bad["counterexample"], 1).accepted


def test_consensus():
    two = audreg.consensus([3, 5])
    assert two["violations"] == 0 and two["crashed_runs"] > 0
    n = audreg.consensus([3, 5, 4], exhaustive=False, seed=7, count=500, backend="a6")
    assert n["runs"] == 500 and n["violations"] == 0
    with pytest.raises(audreg.UsageError):
        audreg.consensus([3, 3])


def test_codec_round_trip():
    c = audreg.WordCodec(audreg.Layout.VALUE_BITS, 2)
    assert c.encode(7) == 28
    assert c.decode(29) == (7, 0, 1)
    big = audreg.WordCodec(audreg.Layout.INTERLEAVED, 3)
    value, sn = 2**70 + 5, 2**65 + 3
    assert big.decode(big.encode(value, sn, 5)) == (value, sn, 5)

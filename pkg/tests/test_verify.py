import pytest

from lifeworld.verify import SUITES, Claim, nonempty_subsets, run_suites


def test_claim_bookkeeping():
    c = Claim("s", "n")
    assert not c.ok  # nothing checked yet
    c.check(True)
    assert c.ok
    c.check(False, "boom")
    assert not c.ok and c.failures == ["boom"] and c.line().startswith("FAIL")


def test_subsets():
    assert len(list(nonempty_subsets("abc"))) == 7


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suite_passes(name):
    claims = SUITES[name]()
    assert claims and all(c.ok for c in claims), "\n".join(c.line() for c in claims)


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suites(["nope"])

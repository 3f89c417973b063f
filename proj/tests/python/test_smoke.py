import os
from fractions import Fraction

import pytest

import iobs

TABLES = os.path.join(os.environ.get("IOBS_DATA_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "data")), "tables")


def test_psi_correlators():
    assert iobs.psi_correlator(1, [1]) == Fraction(1, 24)
    assert iobs.psi_correlator(0, [0, 0, 1, 0]) == 1
    assert iobs.psi_correlator(1, [2, 1, 0]) == Fraction(1, 12)
    with pytest.raises(ValueError):
        iobs.psi_correlator(0, [1])


def test_bernoulli():
    assert iobs.bernoulli_number(2) == Fraction(1, 6)
    assert iobs.bernoulli_number(6) == Fraction(1, 42)


def test_table_correlator_and_missing_key():
    hodge = os.path.join(TABLES, "hodge_g1.jsonl")
    assert iobs.correlator(1, [1, 1], cohft_table=hodge) == Fraction(1, 24)
    with pytest.raises(iobs.MissingCorrelator):
        iobs.correlator(2, [1], cohft_table=hodge)
    with pytest.raises(iobs.TableError):
        iobs.correlator(1, [1], cohft_table=os.path.join(TABLES, "no-such-table.jsonl"))


def test_kdv_and_hodge():
    r = iobs.kdv()
    assert r["flux"] == "1/2*(w[1,0])^2 + 1/12*eps^2*w[1,2]"
    assert r["integral_13"] == "1/12"
    assert iobs.hodge(2)["coefficient"] == "(x1^2*x2 + x1*x2^2)/362880"


def test_relation_checks():
    assert iobs.check("lrt", 2, 1, 2)["status"] == "PASS"
    assert iobs.check("master", 2, 0, 3)["status"] == "PASS"
    with pytest.raises(iobs.MissingCorrelator):
        iobs.check("master", 1, 1, 1)
    assert iobs.verify_dilaton_identities(1, 2, 3)["pass"]
    assert not iobs.verify_dilaton_identities(1, 3, 2, literal_boundary=True)["pass"]


def test_hierarchy():
    f = iobs.fluxes(eps=2, p_max=1)
    values = {(e["alpha"], e["beta"], e["p"]): e["value"] for e in f["fluxes"]}
    assert values[(1, 1, 1)] == "1/2*(w[1,0])^2 + 1/12*eps^2*w[1,2]"
    assert iobs.commute([(1, 1, 1, 2)], eps=2)


def test_algebra_properties_seeded():
    a = iobs.algebra_properties(3, samples=10)
    b = iobs.algebra_properties(3, samples=10, workers=2)
    assert a["pass"] and a == b

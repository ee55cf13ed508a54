import pytest

from cspdigraph.errors import NonlinearIdentity, ParseError
from cspdigraph.identities import (
    OpTable,
    majority_identities,
    parse_identities,
    parse_op_table,
    serialize_identities,
    serialize_op_table,
    tsi_identities,
    wnu_identities,
)

SIGMA_TEXT = """\
# a two-symbol set
symbol f 3
symbol g 2
identity f(x,y,x) = x
identity f(x,x,y) = g(y,x)
"""


def test_parse_identities():
    sigma = parse_identities(SIGMA_TEXT)
    assert sigma.symbols == (("f", 3), ("g", 2))
    assert str(sigma.identities[0]) == "f(x,y,x) = x"
    assert sigma.identities[0].var_count() == 2
    assert not sigma.identities[0].is_balanced()
    assert sigma.identities[1].is_balanced()


def test_identities_round_trip():
    sigma = parse_identities(SIGMA_TEXT)
    assert parse_identities(serialize_identities(sigma)) == sigma


def test_nested_terms_are_nonlinear():
    with pytest.raises(NonlinearIdentity):
        parse_identities("symbol f 1\nidentity f(f(x)) = x\n")


def test_declared_arity_enforced():
    with pytest.raises(Exception, match="arity"):
        parse_identities("symbol f 2\nidentity f(x) = x\n")


def test_idempotency_detection():
    assert majority_identities().is_idempotent()
    assert wnu_identities(3).is_idempotent()
    partial = parse_identities("symbol f 2\nidentity f(x,y) = f(y,x)\n")
    assert not partial.is_idempotent()


def test_liftable_shape_messages():
    assert majority_identities().liftable_shape() is None
    three_var = parse_identities(
        "symbol f 3\nidentity f(x,x,x) = x\nidentity f(x,y,z) = x\n"
    )
    assert "balanced" in three_var.liftable_shape()


def test_tsi_identities_are_balanced():
    sigma = tsi_identities(3)
    assert all(i.is_balanced() or i.var_count() == 1 for i in sigma.identities)


def test_op_table_round_trip():
    op = OpTable("f", 2, 3, tuple(min(a, b) for a in range(3) for b in range(3)))
    assert parse_op_table(serialize_op_table(op)) == op


def test_op_table_missing_row():
    with pytest.raises(ParseError, match="missing row"):
        parse_op_table("op f 1 over 2\n0 0\n")


def test_op_table_is_idempotent():
    op = OpTable("f", 2, 2, (0, 0, 0, 1))
    assert op.is_idempotent()
    assert not OpTable("g", 1, 2, (0, 0)).is_idempotent()

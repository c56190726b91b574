import pytest

from coda.diagnostics import ModelError
from coda.parser import parse
from coda.validate import diagnose, validate


def codes(model):
    return [d.code for d in diagnose(model) if d.severity == "error"]


def test_minimal_model_is_valid():
    m = parse("""
model tiny
component A {
  operation poke kind E {
    guard true
  }
}
""")
    assert validate(m) is m
    # idempotent: validating the same object again returns it unchanged
    assert validate(validate(m)) is m


def test_port_wake_direction_violation():
    m = parse("""
model bad
context c { set PID = { P1 } }
connector CI: PID from CP to WM
component CP {
  operation grab kind P wakes CI { }
}
component WM {
  operation consume kind P wakes CI { }
}
""")
    assert "illegal-action-placement" in codes(m)


def test_level4_model_is_valid(models):
    wm4 = models["wm4"]
    assert [c.name for c in wm4.components] == ["CP", "WM", "DOOR",
                                                "DRUM_SYSTEM"]
    assert {c.name for c in wm4.connectors} == {
        "CI", "WMSTATE", "lock", "doorPosition",
        "hotFill", "coldFill", "drainPump", "level", "temperature"}
    assert not [d for d in diagnose(wm4) if d.severity == "error"]


def test_all_violations_are_reported_not_just_the_first():
    m = parse("""
model broken
component A {
  var x: NAT = true
  operation t1 kind T unsync { }
  operation e1 kind E {
    action port_send(nowhere, 1, delay 1)
  }
}
""")
    found = codes(m)
    assert "type-mismatch" in found
    assert "variant-required" in found
    assert "unresolved-name" in found
    assert len(found) >= 3


def test_duplicate_names():
    m = parse("""
model dup
component A {
  var x: NAT = 0
  var x: NAT = 1
  operation go kind E { }
}
component A {
  operation go kind E { }
}
""")
    assert codes(m).count("duplicate") >= 2


def test_kind_constraints():
    m = parse("""
model sync_rules
component A {
  statemachine sm sync {
    initial -> S
    state S { }
    transition loopy: S -> S links env
  }
  operation env kind E { }
}
""")
    assert "kind-constraint" in codes(m)


def test_wake_group_must_target_owner(models):
    # every shipped P operation wakes only connectors delivered to its owner
    for model in models.values():
        for comp in model.components:
            for op in comp.operations:
                if op.kind == "P":
                    assert op.wake_connectors
                    for cn in op.wake_connectors:
                        assert model.connector(cn).target == comp.name


def test_unenumerable_parameter_rejected():
    m = parse("""
model p
component A {
  operation e kind E {
    param n: NAT
  }
}
""")
    assert "bad-param" in codes(m)


def test_recv_binding_makes_parameter_enumerable():
    m = parse("""
model p
context c { set V = { A1 } }
connector CH: NAT from B to A
component A {
  operation got kind P wakes CH {
    param n: NAT
    guard recv(CH) = n
  }
}
component B {
  operation send kind E {
    action port_send(CH, 3, delay 1)
  }
}
""")
    assert "bad-param" not in codes(m)


def test_axiom_violation():
    m = parse("""
model ax
context c {
  constant N: NAT = 3
  axiom N > 5
}
component A { operation e kind E { } }
""")
    assert "axiom-violated" in codes(m)


def test_recv_illegal_in_actions():
    m = parse("""
model ra
connector CH: NAT from B to A
component A {
  var x: NAT = 0
  operation got kind P wakes CH {
    action x := recv(CH)
  }
}
component B {
  operation send kind E { action port_send(CH, 1, delay 1) }
}
""")
    assert "type-mismatch" in codes(m)


def test_validate_raises_with_all_diagnostics():
    m = parse("model z component A { var v: GHOST = 1 "
              "operation e kind E { } }")
    with pytest.raises(ModelError) as err:
        validate(m)
    assert err.value.diagnostics


def test_missing_receiver_warning():
    m = parse("""
model w
connector CH: NAT from A to B
component A {
  operation send kind E { action port_send(CH, 1, delay 1) }
}
component B { operation e kind E { } }
""")
    warns = [d.code for d in diagnose(m) if d.severity == "warning"]
    assert "no-receiver" in warns

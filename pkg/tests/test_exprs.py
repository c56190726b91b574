import pytest

from coda.exprs import (BOOL, INT, NAT, ArithmeticOverflow, Bin, Env,
                        ExprTypeError, Lit, MinMax, Name, Recv, RecvUnavailable,
                        Scope, StateTest, Unary, eval_expr, eval_guard,
                        set_ref, to_text, type_of)
from coda.parser import _Parser


def expr(text):
    return _Parser(text, "<expr>").parse_expr()


def scope(**kw):
    base = dict(vars={}, consts={}, elements={}, states=(), connectors={},
                params={})
    base.update(kw)
    return Scope(**base)


class TestTyping:
    def test_recv_nat_comparison_is_bool(self):
        sc = scope(connectors={"level": NAT})
        assert type_of(expr("recv(level) >= 20"), sc) == BOOL

    def test_recv_bool_connector(self):
        sc = scope(connectors={"lock": BOOL})
        assert type_of(expr("recv(lock)"), sc) == BOOL

    def test_number_plus_bool_is_mismatch(self):
        with pytest.raises(ExprTypeError) as e:
            type_of(expr("3 + true"), scope())
        assert "'+'" in str(e.value)

    def test_mismatch_carries_path(self):
        sc = scope(vars={"x": NAT})
        with pytest.raises(ExprTypeError) as e:
            type_of(expr("x + (1 and 2)"), sc)
        assert "rhs" in e.value.path

    def test_set_elements(self):
        sc = scope(elements={"QUICK": "PID", "FULL": "PID"},
                   vars={"p": set_ref("PID")})
        assert type_of(expr("p = QUICK"), sc) == BOOL
        with pytest.raises(ExprTypeError):
            type_of(expr("p = 3"), sc)

    def test_nat_minus_is_int(self):
        sc = scope(vars={"n": NAT})
        assert type_of(expr("n - 1"), sc) == INT
        assert type_of(expr("n + 1"), sc) == NAT

    def test_min_max(self):
        sc = scope(vars={"n": NAT})
        assert type_of(expr("min(n + 1, 20)"), sc) == NAT
        with pytest.raises(ExprTypeError):
            type_of(expr("max(n, true)"), sc)

    def test_unresolved_name(self):
        with pytest.raises(ExprTypeError) as e:
            type_of(expr("ghost"), scope())
        assert "ghost" in str(e.value)

    def test_state_test(self):
        sc = scope(states={"IDLE"})
        assert type_of(expr("in(IDLE)"), sc) == BOOL
        with pytest.raises(ExprTypeError):
            type_of(expr("in(LIMBO)"), sc)


class TestEval:
    def env(self, values=None, recv=None):
        values = values or {}

        def lookup(parts):
            if parts[0] in values:
                return values[parts[0]]
            raise KeyError(parts)

        def do_recv(conn):
            if recv and conn in recv:
                return recv[conn]
            raise RecvUnavailable(conn)

        return Env(lookup, do_recv, lambda s, side: s == "ACTIVE")

    def test_arith_and_comparison(self):
        e = self.env({"x": 7})
        assert eval_expr(expr("x * 2 - 3"), e) == 11
        assert eval_expr(expr("min(x, 3, 5)"), e) == 3
        assert eval_expr(expr("max(x, 9)"), e) == 9
        assert eval_expr(expr("x >= 7 and x != 8"), e) is True

    def test_implication_and_not(self):
        e = self.env({"b": False})
        assert eval_expr(expr("b => 1 > 2"), e) is True
        assert eval_expr(expr("not b"), e) is True

    def test_guard_with_missing_recv_is_false(self):
        e = self.env()
        assert eval_guard(expr("recv(CI) = 3"), e) is False
        # and a short-circuited recv is never reached
        assert eval_guard(expr("false and recv(CI) = 3"), e) is False
        assert eval_guard(expr("true or recv(CI) = 3"), e) is True

    def test_overflow_is_an_error(self):
        e = self.env({"x": 2**31 - 1})
        with pytest.raises(ArithmeticOverflow):
            eval_expr(expr("x + 1"), e)

    def test_state_test_eval(self):
        e = self.env()
        assert eval_expr(expr("in(ACTIVE)"), e) is True
        assert eval_expr(expr("in(OTHER)"), e) is False


class TestText:
    @pytest.mark.parametrize("text", [
        "a + b * c",
        "(a + b) * c",
        "not (a and b) or c",
        "x - 1 - 2",
        "x - (1 - 2)",
        "a => b => c",
        "min(x, 2) >= max(y, 3)",
        "recv(CI) = p and in(IDLE)",
        "-x + 3",
    ])
    def test_round_trip(self, text):
        e = expr(text)
        assert _Parser(to_text(e), "<rt>").parse_expr() == e

"""Tests for term construction, parsing, printing, and desugaring.

Desugaring is checked semantically: the rewritten term must evaluate to
the same number as the original on random graphs, using the reference
evaluator on both sides.
"""

import random

import pytest

from aggraph import (
    Agg,
    Environment,
    Apply,
    Const,
    Edge,
    Eq,
    Graph,
    InputError,
    LMean,
    ParseError,
    all_vars,
    default_registry,
    desugar_means,
    desugar_min,
    eval_reference,
    free_vars,
    metrics,
    parse,
    print_term,
    validate,
)

REG = default_registry()


def P(text):
    return parse(text, REG)
MUL = REG.get("mul", 2)
ADD = REG.get("add", 2)

REL_TOL = 1e-9


def evaluates_alike(a, b, graph, assignment=()):
    env = Environment(graph, assignment)
    x = eval_reference(a, env)
    y = eval_reference(b, env)
    return x == pytest.approx(y, rel=REL_TOL, abs=1e-12)


# --- constructors -----------------------------------------------------------


def test_const_rejects_negative_values():
    assert Const(0.0).value == 0.0
    with pytest.raises(InputError):
        Const(-1.0)


def test_apply_checks_the_arity():
    with pytest.raises(InputError):
        Apply(MUL, (Const(1.0),))


def test_agg_checks_its_kind():
    with pytest.raises(InputError):
        Agg("prod", "v", Const(1.0))


def test_lmean_rejects_anchor_equal_to_bound_variable():
    with pytest.raises(InputError):
        LMean("v", "v", Const(1.0))


def test_validate_rejects_shadowing():
    t = Agg("sum", "v", Agg("max", "v", Edge("v", "v")))
    with pytest.raises(InputError):
        validate(t)


# --- metrics ----------------------------------------------------------------


def test_free_vars_in_first_use_order():
    t = P("mul(E(v,u), sum w . mul(E(w,u), E(w,v)))")
    assert free_vars(t) == ("v", "u")
    assert all_vars(t) == {"u", "v", "w"}


def test_metrics_depth_counts_binders_only():
    m = metrics(P("sum u . mul(E(u,v), max w . E(u,w))"))
    assert m.depth == 2
    assert m.free_vars == ("v",)


def test_metrics_width_counts_distinct_variables():
    assert metrics(P("sum v . 1")).width == 1
    assert metrics(P("mul(E(v,u), sum w . E(w,u))")).width == 3


# --- parse and print --------------------------------------------------------


ROUND_TRIPS = [
    "1",
    "0.125",
    "E(u,v)",
    "eq(u,v)",
    "sum v . E(u,v)",
    "max u . sum v . E(u,v)",
    "min w . add(E(u,w), 2)",
    "mean v . max w . E(v,w)",
    "lmean u~v . E(v,w)",
    "mul(E(u,v), E(v,w), E(u,w))",
    "add(sq(E(u,v)), inv(sum w . 1))",
]


@pytest.mark.parametrize("text", ROUND_TRIPS)
def test_print_parse_round_trip(text):
    t = P(text)
    assert P(print_term(t)) == t


def test_printed_numbers_stay_exact():
    t = P("add(2, 0.3)")
    again = P(print_term(t))
    assert again.args[0].value == 2.0
    assert again.args[1].value == 0.3


def test_binder_bodies_extend_right():
    assert P("sum v . add(E(u,v), 1)") == Agg(
        "sum", "v", Apply(ADD, (Edge("u", "v"), Const(1.0)))
    )


def test_parse_reports_position_of_unknown_connective():
    with pytest.raises(ParseError) as info:
        P("sum v .\n  frob(E(u,v))")
    assert info.value.line == 2
    assert info.value.col == 3


def test_parse_rejects_arity_mismatch():
    with pytest.raises(ParseError, match="expects"):
        P("inv(1, 2)")


def test_parse_rejects_reserved_names_as_variables():
    with pytest.raises(ParseError, match="reserved"):
        P("sum max . 1")
    with pytest.raises(ParseError, match="reserved"):
        P("E(sum, v)")


def test_parse_rejects_shadowing_with_position():
    with pytest.raises(ParseError, match="shadows"):
        P("sum v . sum v . 1")


def test_parse_rejects_trailing_garbage_and_bad_chars():
    with pytest.raises(ParseError, match="end of input"):
        P("E(u,v) E(u,v)")
    with pytest.raises(ParseError):
        P("sum v . $")


def test_parse_rejects_lmean_with_equal_names():
    with pytest.raises(ParseError, match="differ"):
        P("lmean v~v . 1")


# --- desugaring -------------------------------------------------------------


def random_graph(rnd, n):
    edges = [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if rnd.random() < 0.5
    ]
    return Graph(n, edges)


SUGARED = [
    ("min v . add(E(u,v), 1)", ("u",)),
    ("min v . E(u,v)", ("u",)),
    ("mean v . E(u,v)", ("u",)),
    ("mean v . max w . E(v,w)", ()),
    ("lmean u~v . E(v,w)", ("u", "w")),
    ("lmean u~v . 1", ("u",)),
    ("sum u . min v . mul(E(u,v), mean w . E(v,w))", ()),
]


@pytest.mark.parametrize("text,fv", SUGARED)
def test_desugaring_preserves_values(text, fv):
    """min/mean/lmean rewrites agree with the primitive semantics."""
    t = P(text)
    lowered = desugar_means(desugar_min(t, REG), REG)
    rnd = random.Random(hash(text) & 0xFFFF)
    for _ in range(25):
        n = rnd.randint(1, 6)
        g = random_graph(rnd, n)
        assignment = tuple(rnd.randrange(n) for _ in fv)
        assert evaluates_alike(t, lowered, g, assignment)


def test_desugared_trees_contain_no_sugar():
    t = P("min v . mean w . lmean v~x . E(w,x)")
    lowered = desugar_means(desugar_min(t, REG), REG)

    def kinds(node):
        if isinstance(node, Agg):
            return {node.kind} | kinds(node.body)
        if isinstance(node, LMean):
            return {"lmean"} | kinds(node.body)
        if isinstance(node, Apply):
            out = set()
            for a in node.args:
                out |= kinds(a)
            return out
        return set()

    assert kinds(lowered) <= {"sum", "max"}
    validate(lowered)


def test_lmean_of_isolated_anchor_is_zero():
    t = P("lmean u~v . 1")
    g = Graph(3, [(1, 2)])
    assert eval_reference(t, Environment(g, (0,))) == 0.0
    assert eval_reference(desugar_means(t, REG), Environment(g, (0,))) == 0.0


def test_desugar_min_agrees_on_all_zero_bodies():
    # The min of an all-zero body over a nonempty domain is 0, and the
    # rewrite must not turn it into anything else.
    t = P("min v . mul(E(u,v), 0)")
    g = Graph(3, [(0, 1), (1, 2)])
    assert eval_reference(t, Environment(g, (0,))) == 0.0
    assert eval_reference(desugar_min(t, REG), Environment(g, (0,))) == 0.0

"""The vectorised kernels must agree bit-for-bit with the scalar evaluator."""
from hypothesis import example, given, settings, strategies as st

from miso.core.world import init_world
from miso.errors import MisoRuntimeError
from miso.frontend import compile_source
from miso.sched import SchedulerKind, run

SIZE = 8

int_lits = st.sampled_from(["0", "1", "2", "3", "7", "1000", "9223372036854775807"])
float_lits = st.sampled_from(["0.0", "0.5", ".1", "1.5", "3.0", "1000000000000000000000.0", "0.0025"])
index = st.sampled_from(["this.pos", "7 - this.pos", "0", "(this.pos * 3) / 4", "this.pos + 1"])


def leaves():
    return st.one_of(
        int_lits, float_lits, st.just("i"), st.just("x"), st.just("this.pos"),
        index.map(lambda e: f"c({e}).i"), index.map(lambda e: f"c({e}).x"))


exprs = st.recursive(
    leaves(),
    lambda sub: st.one_of(
        st.tuples(sub, st.sampled_from("+-*/"), sub).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        sub.map(lambda e: f"-{e}")),
    max_leaves=8)


def program(ei, ex, with_local):
    body = f"i = {ei}; x = {ex};"
    if with_local:
        body = f"var t:Float = {ex}; t = t + i; x = t; i = {ei};"
    return compile_source(f"""
cell C {{
  var i:Int = this.pos * 5 - 17;
  var x:Float = this.pos * 0.37 - 1.1;
  transition {{ {body} }}
}}
c = new C({SIZE})
""")


def outcome(p, scheduler, steps=3):
    world = init_world(p)
    try:
        run(p, world, steps, scheduler)
    except MisoRuntimeError as exc:
        return ("error", exc.message, exc.array, exc.index, exc.step)
    return ("ok", world.checksum())


@settings(max_examples=150, deadline=None)
@given(exprs, exprs, st.booleans())
@example("0", "(-c(this.pos).x * (3 / x))", True)  # product of two NaNs with opposite signs
def test_vector_matches_scalar(ei, ex, with_local):
    p = program(ei, ex, with_local)
    expected = outcome(p, SchedulerKind("seq"))
    assert outcome(p, SchedulerKind("barrier", 1)) == expected
    assert outcome(p, SchedulerKind("barrier", 3)) == expected

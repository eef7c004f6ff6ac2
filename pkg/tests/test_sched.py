import time

import pytest
from hypothesis import given, settings, strategies as st

from miso import corpus
from miso.analysis import build_dep_graph
from miso.core import init_world
from miso.errors import MisoRuntimeError
from miso.frontend import compile_source
from miso.sched import (
    SchedulerKind, StepTrace, chunk_bounds, dataflow_eligible, run, run_barrier_parallel,
    run_dataflow, run_sequential,
)

from conftest import blend_source, compile_corpus

SCHEDULERS = [SchedulerKind("seq"), SchedulerKind("barrier", 1), SchedulerKind("barrier", 2),
              SchedulerKind("barrier", 4), SchedulerKind("barrier", 8),
              SchedulerKind("dataflow", 1), SchedulerKind("dataflow", 4)]
PROGRAMS = [n for n in corpus.names() if n != "listing1"]


@pytest.mark.parametrize("name", PROGRAMS)
def test_schedulers_agree(name):
    p = compile_corpus(name)
    oracle = run_sequential(p, init_world(p), 50)
    for kind in SCHEDULERS[1:]:
        assert run(p, init_world(p), 50, kind).identical(oracle), kind


def test_small_blend_one_step():
    p = compile_source(blend_source(n=4))
    w = run_sequential(p, init_world(p), 1)
    assert w["image1"].committed["r"].tolist() == [1, 1, 1, 1]
    assert w.sigma == {"image1": 1, "image2": 1}


@pytest.mark.parametrize("kind", SCHEDULERS)
def test_zero_steps_leave_world_unchanged(kind):
    p = compile_corpus("mimd")
    w = init_world(p)
    before = w.checksum()
    run(p, w, 0, kind)
    assert w.checksum() == before and set(w.sigma.values()) == {0}


def test_static_only_program_is_fixed():
    p = compile_source("cell S { var r:Int = this.pos; } s = new S(4)")
    w = run_sequential(p, init_world(p), 10)
    assert w["s"].committed["r"].tolist() == [0, 1, 2, 3]


def test_barrier_one_thread_has_sequential_trajectory():
    p = compile_corpus("ring")
    a, b = StepTrace(record_checksums=True), StepTrace(record_checksums=True)
    run_sequential(p, init_world(p), 10, trace=a)
    run_barrier_parallel(p, init_world(p), 10, 1, trace=b)
    assert a.checksums == b.checksums
    assert [(x, s) for _, x, s in a.samples] == [(x, s) for _, x, s in b.samples]


def test_runs_can_resume():
    p = compile_corpus("mimd")
    whole = run_sequential(p, init_world(p), 12)
    w = run_dataflow(p, init_world(p), 5, 2)
    run_barrier_parallel(p, w, 7, 3)
    assert w.identical(whole)


def test_chunk_bounds_cover_range():
    assert chunk_bounds(10, 3) == [(0, 3), (3, 6), (6, 10)]
    assert chunk_bounds(2, 8) == [(0, 1), (1, 2)]


FAULTY = """
cell A { var v:Int = 10; transition { v = v - 1; } }
cell B { var w:Int = 0; transition { w = 100 / a(this.pos).v + b(this.pos).w; } }
cell C { var u:Int = 0; transition { u = c(this.pos + 1).u; } }
a = new A(4)
b = new B(4)
c = new C(3)
"""


@pytest.mark.parametrize("kind", SCHEDULERS)
def test_runtime_error_is_deterministic(kind):
    # c fails at step 1 on index 2; b would fail at step 11
    p = compile_source(FAULTY)
    with pytest.raises(MisoRuntimeError) as info:
        run(p, init_world(p), 20, kind)
    e = info.value
    assert (e.step, e.array, e.index) == (1, "c", 2)


@pytest.mark.parametrize("kind", SCHEDULERS)
def test_earliest_step_wins(kind):
    # a.v is 0 after 10 commits, so computing step 11 of b divides by zero
    p = compile_source(FAULTY.replace("c(this.pos + 1)", "c(this.pos)"))
    with pytest.raises(MisoRuntimeError) as info:
        run(p, init_world(p), 20, kind)
    e = info.value
    assert (e.step, e.array, e.index) == (11, "b", 0)
    assert "division by zero" in e.message


def random_program(n, edges):
    cells = []
    for i in range(n):
        reads = " + ".join(f"a{j}(this.pos).v" for j in sorted(edges.get(i, ()))) or "1"
        cells.append(f"cell C{i} {{ var v:Int = {i}; transition {{ v = (v + {reads}) / 2; }} }}")
    return compile_source("\n".join(cells) + "\n" + "\n".join(f"a{i} = new C{i}(3)" for i in range(n)))


graphs = st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.just(n), st.dictionaries(st.integers(0, n - 1), st.sets(st.integers(0, n - 1)))))


@settings(max_examples=30, deadline=None)
@given(graphs, st.integers(1, 4))
def test_dataflow_terminates_and_matches(graph, threads):
    n, edges = graph
    p = random_program(n, edges)
    trace = StepTrace()
    w = run_dataflow(p, init_world(p), 15, threads, trace=trace)
    assert set(w.sigma.values()) == {15}
    assert w.identical(run_sequential(p, init_world(p), 15))


@settings(max_examples=200)
@given(graphs, st.data())
def test_eligibility_always_makes_progress(graph, data):
    """From any reachable state the minimum-sigma array is eligible."""
    n, edges = graph
    p = random_program(n, edges)
    g = build_dep_graph(p)
    nbrs = {a: g.neighbors(a) for a in p.array_names}
    sigma = {a: 0 for a in p.array_names}
    limit = 6
    while True:
        ready = dataflow_eligible(sigma, nbrs, limit)
        if all(s == limit for s in sigma.values()):
            assert ready == []
            break
        assert ready
        lo = min(sigma.values())
        assert any(sigma[a] == lo for a in ready)
        sigma[data.draw(st.sampled_from(ready))] += 1
        for a in sigma:
            for x in nbrs[a]:
                assert abs(sigma[a] - sigma[x]) <= 1


def skew_trace(p, threads, delays):
    trace = StepTrace()

    def slow(a, step):
        if a in delays:
            time.sleep(delays[a])

    run_dataflow(p, init_world(p), 30, threads, trace=trace, before_step=slow)
    return trace


def max_skew(trace, pairs):
    sigma, worst = {}, 0
    for _, a, s in trace.samples:
        sigma[a] = s
        for x, y in pairs:
            worst = max(worst, abs(sigma.get(x, 0) - sigma.get(y, 0)))
    return worst


def test_connected_pair_skew_is_bounded():
    p = compile_source(blend_source(n=4))
    trace = skew_trace(p, 2, {"image1": 0.0005})
    assert max_skew(trace, [("image1", "image2")]) <= 1


def test_independent_arrays_are_not_held_back():
    p = compile_corpus("independent")
    trace = StepTrace()

    def slow(a, step):
        if a == "q":
            time.sleep(0.002)

    run_dataflow(p, init_world(p), 40, 2, trace=trace, before_step=slow)
    q_at_p_done = 0
    for _, a, s in trace.samples:
        if a == "q":
            q_at_p_done = s
        if a == "p" and s == 40:
            break
    assert q_at_p_done <= 20


def test_barrier_keeps_arrays_in_lockstep():
    p = compile_corpus("independent")
    trace = StepTrace()
    run_barrier_parallel(p, init_world(p), 10, 2, trace=trace)
    assert max_skew(trace, [("p", "q")]) <= 1
    assert [s for _, a, s in trace.samples if a == "p"] == list(range(1, 11))


def test_trace_csv(tmp_path):
    p = compile_corpus("independent")
    trace = StepTrace()
    run_sequential(p, init_world(p), 2, trace=trace)
    path = tmp_path / "t.csv"
    trace.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "wallclock_ns,arrayId,sigma"
    assert [l.split(",", 1)[1] for l in lines[1:]] == ["p,1", "q,1", "p,2", "q,2"]


def test_bad_scheduler_arguments():
    with pytest.raises(ValueError):
        SchedulerKind("gang")
    with pytest.raises(ValueError):
        SchedulerKind("barrier", 0)

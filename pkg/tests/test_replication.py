import pytest

from miso.core import init_world
from miso.depend import (
    FaultModel, FaultSpec, ReplicationConfig, UnrecoverableMismatch, run_replicated,
)
from miso.depend.replication import (
    UNRECOVERABLE, VOTED_REPLICA0, VOTED_REPLICA1, write_health_csv, write_mismatch_csv,
)
from miso.sched import SchedulerKind, run_sequential

from conftest import compile_corpus

SCHEDULERS = [SchedulerKind("seq"), SchedulerKind("barrier", 3), SchedulerKind("dataflow", 2)]


def oracle(p, steps):
    return run_sequential(p, init_world(p), steps)


def replicated(p, steps, specs=(), scheduler=SchedulerKind(), config=ReplicationConfig(), **kw):
    return run_replicated(p, init_world(p), steps, config, FaultModel.targeted(specs),
                          scheduler, verify=True, **kw)


@pytest.mark.parametrize("scheduler", SCHEDULERS)
@pytest.mark.parametrize("name", ["blend", "mimd", "ring", "pair"])
def test_replication_is_transparent(name, scheduler):
    p = compile_corpus(name)
    r = replicated(p, 15, scheduler=scheduler)
    assert r.records == [] and r.injected == []
    assert r.world.identical(oracle(p, 15))


@pytest.mark.parametrize("scheduler", SCHEDULERS)
@pytest.mark.parametrize("replica, winner", [(1, VOTED_REPLICA0), (0, VOTED_REPLICA1)])
def test_single_flip_is_corrected(scheduler, replica, winner):
    p = compile_corpus("blend")
    spec = FaultSpec("image1", 3, 5, replica, "g", 17)
    r = replicated(p, 10, [spec], scheduler)
    assert [(m.step, m.array, m.index, m.field, m.resolution) for m in r.records] == [
        (5, "image1", 3, "g", winner)]
    rec = r.records[0]
    assert rec.replica0_bits ^ rec.replica1_bits == 1 << 17
    assert r.world.identical(oracle(p, 10))


def test_flip_in_static_array_is_corrected():
    p = compile_corpus("blend")
    r = replicated(p, 8, [FaultSpec("image2", 60, 8, 0, "b", 62)])
    assert len(r.records) == 1 and r.records[0].resolution == VOTED_REPLICA1
    assert r.world.identical(oracle(p, 8))


def test_identical_double_flip_goes_undetected():
    p = compile_corpus("pair")
    specs = [FaultSpec("cells", 2, 3, rep, "i", 40) for rep in (0, 1)]
    r = replicated(p, 5, specs)
    assert r.records == []
    assert len(r.injected) == 2
    assert not r.world.identical(oracle(p, 5))


@pytest.mark.parametrize("scheduler", SCHEDULERS)
def test_divergent_double_flip_is_unrecoverable(scheduler):
    p = compile_corpus("pair")
    specs = [FaultSpec("cells", 1, 3, 0, "x", 5), FaultSpec("cells", 1, 3, 1, "x", 6)]
    with pytest.raises(UnrecoverableMismatch) as info:
        replicated(p, 5, specs, scheduler)
    e = info.value
    assert (e.array, e.index, e.step) == ("cells", 1, 3)
    assert [m.resolution for m in e.executor.sorted_records()] == [UNRECOVERABLE]


def test_permanent_fault_is_flagged():
    p = compile_corpus("blend")
    specs = [FaultSpec("image1", 7, s, 1, "r", s % 64) for s in range(1, 201)]
    r = replicated(p, 200, specs, SchedulerKind("barrier", 2),
                   ReplicationConfig(window=100, threshold=0.1))
    assert r.executor.flagged() == [("image1", 7)]
    assert len(r.records) == 200
    assert r.world.identical(oracle(p, 200))


def test_selective_replication():
    p = compile_corpus("blend")
    config = ReplicationConfig(frozenset({"image1"}))
    r = replicated(p, 6, [FaultSpec("image1", 0, 2, 1, "b", 3)], config=config)
    assert set(r.executor.replicas) == {"image1"}
    assert len(r.records) == 1
    with pytest.raises(ValueError):
        replicated(p, 6, [FaultSpec("image2", 0, 2, 1, "b", 3)], config=config)
    with pytest.raises(ValueError):
        ReplicationConfig(frozenset({"zzz"})).replicated(p)


def outcome(p, scheduler, model):
    try:
        r = run_replicated(p, init_world(p), 30, ReplicationConfig(), model, scheduler)
    except UnrecoverableMismatch as exc:
        return ("unrecoverable", exc.step, exc.array, exc.index,
                exc.executor.sorted_records())
    return ("ok", r.world.checksum(), r.records, r.injected)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_random_faults_are_schedule_independent(seed):
    p = compile_corpus("mimd")
    model = FaultModel.random(0.02, seed)
    results = [outcome(p, s, model) for s in SCHEDULERS + [SchedulerKind("barrier", 1)]]
    assert all(r == results[0] for r in results)


def test_random_faults_are_corrected():
    p = compile_corpus("blend")
    r = run_replicated(p, init_world(p), 20, ReplicationConfig(), FaultModel.random(0.002, 11),
                       SchedulerKind("barrier", 2), verify=True)
    assert len(r.injected) > 0
    assert len(r.records) == len(r.injected)
    assert r.world.identical(oracle(p, 20))


def test_csv_logs(tmp_path):
    p = compile_corpus("pair")
    r = replicated(p, 4, [FaultSpec("cells", 0, 2, 1, "x", 0)])
    write_mismatch_csv(r.records, tmp_path / "m.csv")
    write_health_csv(r.health, tmp_path / "h.csv")
    m = (tmp_path / "m.csv").read_text().splitlines()
    assert m[0] == "step,array,index,field,replica0_hexbits,replica1_hexbits,resolution"
    step, array, index, field, b0, b1, res = m[1].split(",")
    assert (step, array, index, field, res) == ("2", "cells", "0", "x", VOTED_REPLICA0)
    assert int(b0, 16) ^ int(b1, 16) == 1
    h = (tmp_path / "h.csv").read_text().splitlines()
    assert h[0] == "array,index,mismatches,window,flagged"
    assert h[1:] == ["cells,0,1,100,false", "cells,1,0,100,false", "cells,2,0,100,false", "cells,3,0,100,false"]

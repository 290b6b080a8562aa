import threading

import pytest

from rtakit.engine import AnalysisConfig, analyze
from rtakit.scheduler import AppendSet, Flag, TaskFailed, TaskPool, mark, run_parallel


def test_mark_once():
    f = Flag()
    assert mark(f) is True
    assert mark(f) is False
    assert bool(f)


@pytest.mark.parametrize("round_", range(20))
def test_mark_race(round_):
    flag = Flag()
    barrier = threading.Barrier(16)
    wins = []

    def racer():
        barrier.wait()
        wins.append(mark(flag))

    threads = [threading.Thread(target=racer) for _ in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert wins.count(True) == 1 and len(wins) == 16


def test_append_set_snapshot_iteration():
    s = AppendSet()
    assert s.add(1) and not s.add(1)
    s.add(2)
    seen = []
    for x in s:
        seen.append(x)
        s.add(x + 10)
    assert seen == [1, 2]
    assert len(s) == 4 and 11 in s


@pytest.mark.parametrize("threads", [1, 4, 16])
def test_pool_runs_transitive_tasks(threads):
    pool = TaskPool(threads)
    done = AppendSet()

    def task(n):
        done.add(n)
        if n < 200:
            pool.schedule(task, 2 * n)
            pool.schedule(task, 2 * n + 1)

    pool.schedule(task, 1)
    pool.run()
    assert len(done) == 399
    assert pool.executed == 399
    assert pool.in_flight == 0


@pytest.mark.parametrize("threads", [1, 4])
def test_task_failure_aborts(threads):
    pool = TaskPool(threads)

    def bad():
        raise RuntimeError("boom")

    pool.schedule(bad)
    with pytest.raises(TaskFailed):
        pool.run()


def test_threads_must_be_positive():
    with pytest.raises(ValueError):
        TaskPool(0)


@pytest.mark.parametrize("threads", [1, 16])
def test_run_parallel_running_example(threads, running_example):
    assert run_parallel(running_example, AnalysisConfig(threads=threads)) == analyze(running_example)


@pytest.mark.parametrize("threads", [2, 8])
def test_run_parallel_empty_main(threads, empty_main):
    assert run_parallel(empty_main, AnalysisConfig(threads=threads)) == analyze(empty_main)

"""Timing harness comparing the cascade with the reference methods."""

from __future__ import annotations

import statistics
import time

import numpy as np

from . import cascade, oracles
from .io import METHODS, ResultRow
from .linalg import ContractError, SignalBlock, deterministic
from .lti import DiscreteLTI
from .plr import plr_power_build


def random_input(seed: int, p: int, L: int) -> SignalBlock:
    """Seeded input block with entries uniform in [-1, 1]."""
    rng = np.random.default_rng(seed)
    return SignalBlock(rng.uniform(-1.0, 1.0, size=(p, L)))


def rel_l2(a, b) -> float:
    a = a.data if isinstance(a, SignalBlock) else np.asarray(a)
    b = b.data if isinstance(b, SignalBlock) else np.asarray(b)
    ref = np.linalg.norm(b)
    diff = np.linalg.norm(a - b)
    return float(diff / ref) if ref > 0 else float(diff)


def _runner(method: str, sys: DiscreteLTI, plan, plr_powers):
    """Return ``fn(u) -> (output, matvec_count)`` for one method."""
    if method == "cascade":
        def run(u):
            y, stats = cascade.apply(plan, sys, u)
            return y, stats.matvec_count
    elif method == "cascade-plr":
        def run(u):
            y, stats = cascade.apply(plan, sys, u, operators=plr_powers)
            return y, stats.matvec_count
    elif method == "recurrence":
        def run(u):
            return oracles.recurrence_apply(sys, u), u.length
    elif method == "conv":
        def run(u):
            kernel = oracles.kernel_materialize(sys, u.length)
            return oracles.conv_apply(kernel, u), (u.length - 1) * sys.p
    else:
        raise ContractError(f"unknown method {method!r}; choose from {METHODS}")
    return run


def run_bench(sys: DiscreteLTI, lengths, methods, reps: int = 5, seed: int = 0,
              tol: float = 1e-12, stages: int | None = None, plr_eps: float = 1e-10,
              is_deterministic: bool = False) -> list[ResultRow]:
    """Time each method on seeded inputs of every length.

    All inputs and references are built before any timing starts; each
    method is warmed once and the median of ``reps`` wall-clock runs is
    reported.
    """
    for method in methods:
        if method not in METHODS:
            raise ContractError(f"unknown method {method!r}; choose from {METHODS}")
    plan = cascade.plan_stages(sys, stages) if stages else cascade.plan(sys, tol)
    plr_powers = None
    if "cascade-plr" in methods:
        plr_powers = plr_power_build(sys, plan.stages, plr_eps, powers=plan.powers)
    rows = []
    with deterministic(is_deterministic):
        for i, L in enumerate(lengths):
            u = random_input(seed + i, sys.p, L)
            reference = oracles.recurrence_apply(sys, u)
            for method in methods:
                run = _runner(method, sys, plan, plr_powers)
                y, count = run(u)
                times = []
                for _ in range(max(reps, 1)):
                    t0 = time.perf_counter_ns()
                    run(u)
                    times.append(time.perf_counter_ns() - t0)
                err = None if method == "recurrence" else rel_l2(y, reference)
                method_stages = plan.stages if method.startswith("cascade") else 0
                method_tol = plan.tol if method.startswith("cascade") else None
                rows.append(ResultRow(method, sys.m, sys.p, sys.q, L, method_stages, method_tol,
                                      count, int(statistics.median(times)), err))
    return rows

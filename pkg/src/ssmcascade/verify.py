"""Cross-method consistency checks run by ``ssmcascade verify``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cascade, oracles
from .bench import random_input, rel_l2
from .linalg import deterministic
from .lti import hippo_system, random_discrete
from .plr import plr_power_build


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    limit: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.3e} (limit {self.limit:.3e})"


def _check(name, value, limit) -> Check:
    return Check(name, bool(value <= limit), float(value), float(limit))


def run_checks(seed: int = 0, tol: float = 1e-10, systems: int = 5,
               is_deterministic: bool = True) -> list[Check]:
    """Seeded random systems plus the HiPPO system, every method pair compared.

    ``tol`` is the relative agreement required between methods that compute
    the same map; the frequency check compares against the analytic bound.
    """
    rng = np.random.default_rng(seed)
    checks = []
    with deterministic(is_deterministic):
        for i in range(systems):
            m = int(rng.integers(2, 9))
            sys = random_discrete(rng, m, p=int(rng.integers(1, 3)), q=int(rng.integers(1, 3)))
            L = int(rng.integers(16, 129))
            u = random_input(seed * 1000 + i, sys.p, L)
            ref = oracles.recurrence_apply(sys, u)
            full = cascade.plan_stages(sys, max(1, (L - 1).bit_length()))
            y, _ = cascade.apply(full, sys, u)
            checks.append(_check(f"random[{i}] cascade==recurrence", rel_l2(y, ref), tol))
            y = oracles.conv_apply(oracles.kernel_materialize(sys, L), u)
            checks.append(_check(f"random[{i}] recurrence==conv", rel_l2(y, ref), tol))
            small = cascade.plan_stages(sys, 3)
            err, bnd = cascade.frequency_check(small, sys, 512)
            checks.append(_check(f"random[{i}] frequency error <= bound", err, bnd))
            ops = plr_power_build(sys, full.stages, 1e-14, leaf_size=2, powers=full.powers)
            y_plr, _ = cascade.apply(full, sys, u, operators=ops)
            y_dense, _ = cascade.apply(full, sys, u)
            checks.append(_check(f"random[{i}] plr==dense", rel_l2(y_plr, y_dense), tol))

        sys = hippo_system()
        p = cascade.plan(sys, 1e-12)
        checks.append(_check("hippo plan stages == 15", abs(p.stages - 15), 0))
        u = random_input(seed, 1, 4096)
        ref = oracles.recurrence_apply(sys, u)
        y, _ = cascade.apply(p, sys, u)
        checks.append(_check("hippo cascade==recurrence", rel_l2(y, ref), tol))
        err, bnd = cascade.frequency_check(p, sys, 256)
        checks.append(_check("hippo frequency error <= bound", err, bnd))
        ops = plr_power_build(sys, p.stages, 1e-10, powers=p.powers)
        u = random_input(seed, 1, 1024)
        y_plr, _ = cascade.apply(p, sys, u, operators=ops)
        y_dense, _ = cascade.apply(p, sys, u)
        checks.append(_check("hippo plr==dense", rel_l2(y_plr, y_dense), 1e-8))
    return checks

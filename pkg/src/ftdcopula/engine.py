"""
Monte-Carlo orchestration.

Every path owns a substream: path ``i`` reads its uniforms from a Philox
counter-based generator keyed by the master seed, at counter offset
``i * ceil(n / 4)``. The uniforms for a path are therefore a pure function
of ``(master_seed, i)``, so paths can be generated in any order on any number
of workers and the per-path table is always the same. Aggregation runs once
over the full table in path-index order.
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._jit import default_backend
from .kernels import value_paths
from .numerics import CorrelationMatrix, _phi_inv, cholesky, phi_inv_array
from .pricing import BasketSpec, DiscountCurve, PathTable, PricingReport, build_report

log = logging.getLogger(__name__)

CHUNK_PATHS = 1 << 16
_SEED_LIMIT = 1 << 64
_U53 = 2.0**-53


@dataclass(frozen=True)
class SimulationConfig:
    n_paths: int
    master_seed: int = 1200
    workers: int = 1
    batch_count: int = 100
    keep_times: bool = False
    backend: str | None = None

    def __post_init__(self):
        if int(self.n_paths) < 1:
            raise ValueError(f"n_paths must be >= 1, got {self.n_paths!r}")
        if not 0 <= int(self.master_seed) < _SEED_LIMIT:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if int(self.workers) < 1:
            raise ValueError("workers must be >= 1")
        if int(self.batch_count) < 2:
            raise ValueError("batch_count must be >= 2")


@dataclass
class RunResult:
    """``paths`` holds per-path legs; per-name default times only when ``keep_times`` was set."""

    report: PricingReport
    wall_time: float
    paths_per_second: float
    paths: PathTable


def _blocks_per_path(n: int) -> int:
    return -(-n // 4)


def substream_uniforms(master_seed: int, start: int, count: int, n: int) -> np.ndarray:
    """Uniforms in (0, 1) for paths ``start .. start + count - 1``, shape (count, n).

    Each uniform is ``(k + 0.5) / 2**53`` for a 53-bit integer ``k``, so 0 and
    1 are never produced.
    """
    k = _blocks_per_path(n)
    bg = np.random.Philox(key=int(master_seed), counter=int(start) * k)
    raw = bg.random_raw(count * 4 * k).reshape(count, 4 * k)[:, :n]
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _U53


def substream_normals(master_seed: int, path_index: int, n: int, backend: str | None = None) -> np.ndarray:
    """The ``n`` independent standard normals that path ``path_index`` consumes."""
    if n < 1:
        raise ValueError("n must be >= 1")
    u = substream_uniforms(master_seed, path_index, 1, n)[0]
    if (backend or default_backend()) == "numba":
        return np.array([_phi_inv(v) for v in u])
    return phi_inv_array(u)


def simulate_paths(
    basket: BasketSpec,
    sigma: CorrelationMatrix,
    curve: DiscountCurve,
    n_paths: int,
    master_seed: int,
    workers: int = 1,
    keep_times: bool = False,
    backend: str | None = None,
) -> PathTable:
    """Generate and value ``n_paths`` paths; the result does not depend on ``workers``."""
    if sigma.n != basket.n:
        raise ValueError(f"correlation matrix is {sigma.n}x{sigma.n} for {basket.n} names")
    L = cholesky(sigma).L
    hazards = basket.hazards
    recoveries = basket.recoveries
    pay_times = basket.schedule.as_array()
    pay_df = curve.df(pay_times)
    n = basket.n

    def run_chunk(start):
        count = min(CHUNK_PATHS, n_paths - start)
        u = substream_uniforms(master_seed, start, count, n)
        out = value_paths(u, L, hazards, recoveries, pay_times, pay_df, basket.maturity, curve.rate, backend)
        return out if keep_times else (None,) + out[1:]

    starts = range(0, n_paths, CHUNK_PATHS)
    if workers == 1 or len(starts) == 1:
        parts = [run_chunk(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_chunk, starts))

    first_time, first_index, premium, protection = (np.concatenate([p[i] for p in parts]) for i in range(1, 5))
    return PathTable(
        first_time=first_time,
        first_index=first_index,
        premium_pv=premium,
        protection_pv=protection,
        times=np.concatenate([p[0] for p in parts]) if keep_times else None,
    )


def run_simulation(
    basket: BasketSpec, sigma: CorrelationMatrix, curve: DiscountCurve, config: SimulationConfig
) -> RunResult:
    """Simulate, value, and aggregate with both spread estimators."""
    backend = config.backend or default_backend()
    t0 = time.perf_counter()
    table = simulate_paths(
        basket,
        sigma,
        curve,
        int(config.n_paths),
        int(config.master_seed),
        workers=int(config.workers),
        keep_times=config.keep_times,
        backend=backend,
    )
    report = build_report(
        table,
        seed=int(config.master_seed),
        batch_count=int(config.batch_count),
        metadata={"backend": backend, "rng": "philox4x64 per-path substreams", "chunk_paths": CHUNK_PATHS},
    )
    wall = time.perf_counter() - t0
    log.info("%d paths in %.3fs (%s)", config.n_paths, wall, backend)
    return RunResult(
        report=report,
        wall_time=wall,
        paths_per_second=config.n_paths / wall if wall > 0 else math.inf,
        paths=table,
    )


@dataclass(frozen=True)
class ConvergenceRow:
    n_paths: int
    spread_paper: float
    spread_standard: float
    se_paper: float
    se_standard: float


def convergence_report(
    table: PathTable, checkpoints, seed: int = 0, batch_count: int = 100
) -> list[ConvergenceRow]:
    """Estimates over the first ``c`` paths for each checkpoint ``c``.

    Because paths are a pure function of their index, each row equals the
    report of a fresh run with ``c`` paths and the same seed.
    """
    checkpoints = [int(c) for c in checkpoints]
    if checkpoints != sorted(checkpoints):
        raise ValueError("checkpoints must be sorted ascending")
    if checkpoints and (checkpoints[0] < 1 or checkpoints[-1] > len(table)):
        raise ValueError(f"checkpoints must lie in [1, {len(table)}]")
    rows = []
    for c in checkpoints:
        rep = build_report(table[:c], seed=seed, batch_count=batch_count)
        rows.append(ConvergenceRow(c, rep.spread_paper, rep.spread_standard, rep.se_paper, rep.se_standard))
    return rows

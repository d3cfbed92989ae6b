"""Random-instance experiments comparing bottom-up, top-down and composite.

Randomness comes from numpy's PCG64 bit generator.  Every instance has
its own seed, derived by hashing the base seed with the instance
coordinates, so results do not depend on execution order or on the
number of worker processes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .distortion import DistortionFn
from .exact import solve_exact_multilevel
from .graph import Graph, as_exact
from .multilevel import (
    LevelCache,
    LevelCostFn,
    Quantizer,
    SparsifierKind,
    TerminalHierarchy,
    composite,
    make_solver,
    round_mlags,
)

__all__ = [
    "gen_er",
    "er_probability",
    "sample_terminals",
    "terminal_sizes",
    "derive_seed",
    "ExperimentConfig",
    "run_experiment",
    "rows_to_csv",
    "read_csv",
    "CSV_HEADER",
    "PRNG_NAME",
]

PRNG_NAME = "numpy.PCG64"
CSV_HEADER = (
    "generator,n,ell,t,trial,seed,subroutine,cost_bu,cost_td,cost_cmp,baseline,"
    "ratio_bu,ratio_td,ratio_cmp,ms_bu,ms_td,ms_cmp,ms_baseline"
).split(",")
MAX_RESAMPLES = 100


def derive_seed(base, *coords):
    """64-bit seed from ``base`` and instance coordinates (BLAKE2b)."""
    text = repr((int(base),) + tuple(str(c) for c in coords)).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


def er_probability(n):
    return min(1.0, 2 * math.log(n) / n)


def _er_sample(n, p, rng):
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    weights = rng.integers(1, 11, size=iu.size)
    return [(int(u), int(v), int(w)) for u, v, w, k in zip(iu, ju, weights, keep) if k]


def gen_er(n, seed, *, require_connected=True):
    """Erdős–Rényi graph ``G(n, 2 ln n / n)`` on vertices ``0..n-1``.

    Weights are uniform on ``1..10``.  Disconnected draws are discarded
    and redrawn from the same stream (at most 100 attempts).
    """
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    p = er_probability(n)
    for _ in range(MAX_RESAMPLES):
        g = Graph(_er_sample(n, p, rng), vertices=range(n))
        if not require_connected or g.is_connected():
            return g
    raise RuntimeError(f"no connected G({n}, {p:.3f}) sample in {MAX_RESAMPLES} attempts")


def terminal_sizes(n, ell):
    return tuple(n * (ell - i + 1) // (ell + 1) for i in range(1, ell + 1))


def sample_terminals(g, ell, seed):
    """Nested terminals with ``|T_i| = floor(|V| (l - i + 1) / (l + 1))``.

    ``T_1`` is drawn uniformly without replacement from ``V`` and each
    ``T_i`` uniformly without replacement from ``T_{i-1}``.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    sizes = terminal_sizes(g.n, ell)
    if sizes[-1] < 2:
        raise ValueError(f"|T_{ell}| = {sizes[-1]} < 2 for |V| = {g.n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    pool = list(g.vertices)
    levels = []
    for s in sizes:
        idx = rng.choice(len(pool), size=s, replace=False)
        pool = sorted(pool[k] for k in idx)
        levels.append(pool)
    return TerminalHierarchy(levels)


@dataclass
class ExperimentConfig:
    """Grid of instances and solver settings.

    ``mode="exact"`` divides by the optimum (small instances only);
    ``mode="relative"`` divides by ``min(BU, TD, CMP)``.
    """

    ns: tuple = (6, 8, 10)
    ells: tuple = (2, 3)
    stretches: tuple = (Fraction(6, 5), Fraction(7, 5), 2, 4)
    trials: int = 3
    seed: int = 0
    subroutines: tuple = ("oracle",)
    mode: str = "exact"
    generator: str = "er"
    record_timing: bool = False
    jobs: int = 1
    cost: str = "linear"

    def __post_init__(self):
        self.ns = tuple(int(n) for n in self.ns)
        self.ells = tuple(int(x) for x in self.ells)
        self.stretches = tuple(as_exact(t) for t in self.stretches)
        self.subroutines = tuple(self.subroutines)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(t < 1 for t in self.stretches):
            raise ValueError("stretch values must be >= 1")
        if any(n < 3 for n in self.ns):
            raise ValueError("n must be >= 3")
        if any(x < 1 for x in self.ells):
            raise ValueError("ell must be >= 1")
        if self.mode not in ("exact", "relative"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.generator != "er":
            raise ValueError(f"unknown generator {self.generator!r}")
        for s in self.subroutines:
            if s not in ("oracle", "metric-closure"):
                raise ValueError(f"unknown subroutine {s!r}")
        if self.cost != "linear":
            raise ValueError("only the linear level cost is supported in experiments")

    def level_cost(self):
        return LevelCostFn.linear()

    def cells(self):
        """Instance coordinates ``(n, ell, trial)`` that admit terminals."""
        out = []
        for n in self.ns:
            for ell in self.ells:
                if terminal_sizes(n, ell)[-1] < 2:
                    continue
                for trial in range(self.trials):
                    out.append((n, ell, trial))
        return out

    def skipped(self):
        return [(n, ell) for n in self.ns for ell in self.ells if terminal_sizes(n, ell)[-1] < 2]


def instance(cfg, n, ell, trial):
    """Graph, terminals and instance seed for one grid cell."""
    gseed = derive_seed(cfg.seed, cfg.generator, n, trial)
    g = gen_er(n, gseed)
    tseed = derive_seed(cfg.seed, "terminals", n, ell, trial)
    return g, sample_terminals(g, ell, tseed), gseed


def _fmt_ratio(x):
    return f"{x:.6f}"


def _ms(seconds):
    return f"{seconds * 1000:.3f}"


def _run_cell(cfg, n, ell, trial):
    g, h, gseed = instance(cfg, n, ell, trial)
    gfn = cfg.level_cost()
    rows = []
    for t in cfg.stretches:
        f = DistortionFn.multiplicative(t)
        kind = SparsifierKind.spanner(f)
        opt = None
        opt_ms = 0.0
        if cfg.mode == "exact":
            t0 = time.perf_counter()
            opt = solve_exact_multilevel(g, h, f, gfn).cost(gfn)
            opt_ms = time.perf_counter() - t0
        for sub in cfg.subroutines:
            solver = make_solver(kind, sub)
            cache = LevelCache(g, h, solver)
            t0 = time.perf_counter()
            bu = round_mlags(g, h, Quantizer.bottom_up(ell), kind, solver, cache=cache).cost(gfn)
            t1 = time.perf_counter()
            td = round_mlags(g, h, Quantizer.top_down(ell), kind, solver, cache=cache).cost(gfn)
            t2 = time.perf_counter()
            cm = composite(g, h, kind, solver, gfn, cache=cache).cost(gfn)
            t3 = time.perf_counter()
            # solve times are shared through the cache; charge each method
            # the levels it needs plus its own merging time
            solve = cache.seconds
            bu_levels = Quantizer.bottom_up(ell).levels
            ms_bu = sum(solve[i] for i in bu_levels) + max(0.0, (t1 - t0) - sum(solve[i] for i in bu_levels))
            new_td = [i for i in range(1, ell + 1) if i not in bu_levels]
            ms_td = sum(solve.values()) + max(0.0, (t2 - t1) - sum(solve[i] for i in new_td))
            ms_cmp = sum(solve.values()) + (t3 - t2)
            baseline = opt if opt is not None else min(bu, td, cm)
            row = {
                "generator": cfg.generator,
                "n": n,
                "ell": ell,
                "t": str(t),
                "trial": trial,
                "seed": gseed,
                "subroutine": sub,
                "cost_bu": bu,
                "cost_td": td,
                "cost_cmp": cm,
                "baseline": baseline,
                "ratio_bu": _fmt_ratio(bu / baseline),
                "ratio_td": _fmt_ratio(td / baseline),
                "ratio_cmp": _fmt_ratio(cm / baseline),
                "ms_bu": _ms(ms_bu) if cfg.record_timing else "",
                "ms_td": _ms(ms_td) if cfg.record_timing else "",
                "ms_cmp": _ms(ms_cmp) if cfg.record_timing else "",
                "ms_baseline": _ms(opt_ms) if cfg.record_timing and opt is not None else "",
            }
            rows.append(row)
    return rows


def _cell_job(args):
    cfg_dict, n, ell, trial = args
    return _run_cell(ExperimentConfig(**cfg_dict), n, ell, trial)


def _sort_key(row):
    return (row["generator"], row["n"], row["ell"], Fraction(row["t"]), row["trial"], row["subroutine"])


def run_experiment(cfg):
    """Run every cell of ``cfg``; rows come back in canonical order."""
    cells = cfg.cells()
    if cfg.jobs > 1 and len(cells) > 1:
        payload = asdict(cfg)
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            chunks = list(pool.map(_cell_job, [(payload, n, ell, tr) for n, ell, tr in cells]))
    else:
        chunks = [_run_cell(cfg, n, ell, tr) for n, ell, tr in cells]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=_sort_key)
    return rows


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_HEADER, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: r[k] for k in CSV_HEADER})
    return buf.getvalue()


def read_csv(text):
    """Parse experiment CSV text; checks the header."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_HEADER:
        raise ValueError("unexpected CSV header")
    return list(reader)


def summarize(rows, key="ratio_cmp"):
    """Mean of a ratio column per subroutine."""
    out = {}
    for r in rows:
        out.setdefault(r["subroutine"], []).append(float(r[key]))
    return {k: sum(v) / len(v) for k, v in sorted(out.items())}


"""Experiment orchestration: radius window, threshold scans and collision statistics.

Every sample is a configuration-model graph drawn with seed ``seed_base + index``,
so any row of an output table can be regenerated from the config alone.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .cycle_structure import DomainError
from .graph_core import sample_configuration

__all__ = [
    "DomainError", "RadiusWindow", "ExperimentConfig", "ExperimentRecord", "CollisionRow",
    "radius_formulas", "threshold_scan", "scan_sample", "collision_stats", "write_csv",
    "rows_to_csv", "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RadiusWindow:
    R_minus: int
    R_plus: int
    R_max: int

    def __iter__(self):
        return iter((self.R_minus, self.R_plus, self.R_max))


def radius_formulas(n: int, d: int, delta: float = 10.0) -> RadiusWindow:
    """R_- = floor((ln n + ln ln n - delta) / (2 ln(d-1))), R_+ = ceil(... + delta ...),
    R_max = floor((ln n + 2 ln ln n) / (2 ln(d-1)))."""
    if d < 3:
        raise ValueError("d must be at least 3")
    if n <= math.e:
        raise DomainError("ln ln n is undefined for n <= e")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    ln, lln, ld = math.log(n), math.log(math.log(n)), 2 * math.log(d - 1)
    return RadiusWindow(
        math.floor((ln + lln - delta) / ld),
        math.ceil((ln + lln + delta) / ld),
        math.floor((ln + 2 * lln) / ld),
    )


@dataclass
class ExperimentConfig:
    n: list[int]
    d: list[int]
    r_policy: str = "absolute"  # absolute | minus | plus
    radius: int | None = None  # used by the absolute policy
    delta: float = 10.0
    samples: int = 10
    seed_base: int = 0
    workers: int = 1
    r_max: int | None = None  # scan ceiling for r_distinct; default R_+ + 2
    sources: list[int] = field(default_factory=lambda: [1])  # source-set sizes for collision_stats

    def __post_init__(self):
        self.n = [int(x) for x in np.atleast_1d(self.n)]
        self.d = [int(x) for x in np.atleast_1d(self.d)]
        self.validate()

    def validate(self) -> None:
        if self.samples < 1:
            raise ValueError("sample count must be at least 1")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.r_policy not in ("absolute", "minus", "plus"):
            raise ValueError(f"unknown R policy {self.r_policy!r}")
        if self.r_policy == "absolute" and self.radius is None and self.r_max is None:
            raise ValueError("the absolute policy needs a radius")
        for n in self.n:
            for d in self.d:
                if (n * d) % 2:
                    raise ValueError(f"n*d must be even (n={n}, d={d})")
                self.resolve(n, d)

    def resolve(self, n: int, d: int) -> int:
        """Radius prescribed by the policy for (n, d)."""
        if self.r_policy == "absolute":
            return int(self.radius if self.radius is not None else self.r_max)
        w = radius_formulas(n, d, self.delta)
        return w.R_minus if self.r_policy == "minus" else w.R_plus

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls(**json.loads(Path(path).read_text()))

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentRecord:
    schema: int
    n: int
    d: int
    seed: int
    delta: float
    R_minus: int
    R_plus: int
    r_max: int
    r_distinct: int  # -1 when not found up to r_max or on error
    in_window: bool
    seconds: float
    gamma_at_r: int  # cycle count of B_R(0) at R = r_distinct (or r_max)
    error: str = ""


def scan_sample(n: int, d: int, seed: int, delta: float, r_max: int | None = None) -> ExperimentRecord:
    """One threshold-scan row: r_distinct of the configuration-model graph with this seed."""
    from ._fast import gamma_by_radius
    from .assembly import r_distinct

    w = radius_formulas(n, d, delta)
    top = r_max if r_max is not None else w.R_plus + 2
    t0 = time.perf_counter()
    try:
        g = sample_configuration(n, d, seed)
        r = r_distinct(g, top)
        r = int(r) if r else -1
        gam = int(gamma_by_radius(g, [0], r if r > 0 else top)[-1])
        err = ""
    except Exception as exc:  # recorded per sample, the run continues
        r, gam, err = -1, -1, f"{type(exc).__name__}: {exc}"
    dt = time.perf_counter() - t0
    inside = r >= 0 and w.R_minus <= r + 1 <= w.R_plus + 1
    return ExperimentRecord(SCHEMA_VERSION, n, d, seed, delta, w.R_minus, w.R_plus, top, r, inside,
                            round(dt, 3), gam, err)


def _scan_job(args):
    return scan_sample(*args)


def threshold_scan(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    """r_distinct for ``cfg.samples`` graphs per (n, d); sorted by (n, d, seed)."""
    jobs = [(n, d, cfg.seed_base + i, cfg.delta, cfg.r_max)
            for n in cfg.n for d in cfg.d for i in range(cfg.samples)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            rows = list(ex.map(_scan_job, jobs))
    else:
        rows = [_scan_job(j) for j in jobs]
    rows.sort(key=lambda r: (r.n, r.d, r.seed))
    return rows


@dataclass
class CollisionRow:
    schema: int
    n: int
    d: int
    sources: int
    R: int
    samples: int
    mean_gamma: float
    std_gamma: float
    max_gamma: int
    p999_gamma: float
    bound: float  # 2 |s|^2 (d-1)^(2R) / n
    threshold: float  # 2 e |s|^2 (ln n)^2
    exceedances: int
    mean_m: float  # mean number of collisions closed at level R (the m_R series)


def collision_stats(cfg: ExperimentConfig, radii: Sequence[int] | None = None) -> list[CollisionRow]:
    """Cycle counts of B_R(s) with s = {0, ..., |s|-1} over ``cfg.samples`` graphs per (n, d).

    Radii default to 1..R_max.  Sources are fixed labels; vertex labels are
    exchangeable in the configuration model.
    """
    from ._fast import gamma_by_radius

    rows: list[CollisionRow] = []
    for n in cfg.n:
        for d in cfg.d:
            rmax_formula = radius_formulas(n, d, cfg.delta).R_max
            rs = list(radii) if radii is not None else list(range(1, rmax_formula + 1))
            top = max(rs)
            data = {s: np.zeros((cfg.samples, top + 1), dtype=np.int64) for s in cfg.sources}
            for i in range(cfg.samples):
                g = sample_configuration(n, d, cfg.seed_base + i)
                for s in cfg.sources:
                    data[s][i] = gamma_by_radius(g, np.arange(s), top)
            for s in cfg.sources:
                gam = data[s]
                thr = 2 * math.e * s * s * math.log(n) ** 2
                for R in rs:
                    col = gam[:, R]
                    rows.append(CollisionRow(
                        SCHEMA_VERSION, n, d, s, R, cfg.samples, float(col.mean()), float(col.std()),
                        int(col.max()), float(np.quantile(col, 0.999)),
                        2 * s * s * (d - 1) ** (2 * R) / n, thr, int((col >= thr).sum()),
                        float((gam[:, R] - gam[:, R - 1]).mean()) if R > 0 else 0.0,
                    ))
    return rows


def rows_to_csv(rows: Sequence) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    fields = list(asdict(rows[0]).keys())
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(asdict(r))
    return buf.getvalue()


def write_csv(rows: Sequence, path, json_mirror: bool = True) -> None:
    p = Path(path)
    p.write_text(rows_to_csv(rows))
    if json_mirror:
        p.with_suffix(".json").write_text(json.dumps([asdict(r) for r in rows], indent=1) + "\n")

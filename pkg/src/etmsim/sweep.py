"""Parameter sweeps over (T_I, sigma_e): heatmap tables and path cuts.

Every grid point is solved independently with :func:`~etmsim.schmidt.converge_spectrum`,
so a sweep is embarrassingly parallel. Results are keyed by the exact
17-significant-digit rendering of the point, which makes checkpoint files
robust against float re-parsing and lets an interrupted sweep resume
without recomputing finished points.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .io import write_csv
from .params import ChiModel, ControlParams, GridSpec
from .schmidt import converge_spectrum

HEATMAP_HEADER = ["T_I", "sigma_e", "H2", "kappa", "converged"]
CUT_HEADER = ["arc_index", "T_I", "sigma_e", "kappa"]

#: Default heatmap extent. The interaction-time axis brackets the extreme
#: regimes of interest and the bandwidth axis runs from far narrower than
#: the film response up to twice its scale.
T_RANGE_DEFAULT = (1e-5, 1e-2)
SIGMA_RANGE_DEFAULT = (0.05, 2.0)


def log_axis(lo: float, hi: float, n: int) -> tuple:
    """Return ``n`` log-spaced values from lo to hi inclusive."""
    if not (0 < lo <= hi) or not math.isfinite(hi):
        raise ValidationError(f"log axis needs 0 < lo <= hi, got ({lo!r}, {hi!r})")
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValidationError(f"axis length must be a positive integer, got {n!r}")
    if n == 1:
        return (float(lo),)
    return tuple(float(v) for v in np.geomspace(lo, hi, n))


def linear_axis(lo: float, hi: float, n: int) -> tuple:
    """Return ``n`` evenly spaced values from lo to hi inclusive."""
    if not (lo <= hi) or not math.isfinite(lo) or not math.isfinite(hi):
        raise ValidationError(f"linear axis needs finite lo <= hi, got ({lo!r}, {hi!r})")
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValidationError(f"axis length must be a positive integer, got {n!r}")
    if n == 1:
        return (float(lo),)
    return tuple(float(v) for v in np.linspace(lo, hi, n))


def point_key(t_i: float, sigma_e: float) -> str:
    """Checkpoint key for one grid point: exact input strings, not hashes."""
    return f"{t_i:.17g}|{sigma_e:.17g}"


def _check_axis(values, name: str, problems: list) -> tuple:
    vals = tuple(float(v) for v in values)
    if not vals:
        problems.append(f"{name} axis must be nonempty")
    for v in vals:
        if not (v > 0 and math.isfinite(v)):
            problems.append(f"{name} axis values must be positive finite, got {v!r}")
            break
    return vals


@dataclass(frozen=True)
class SweepPlan:
    """A sweep over interaction time and beam bandwidth.

    ``t_values`` and ``sigma_values`` span the heatmap; ``path`` is an
    optional parametric list of (T_I, sigma_e) pairs for a cut. The same
    ``chi`` and starting ``grid`` apply at every point (windows left at
    ``None`` are resolved per point, so narrow and broad beams each get
    an appropriate detection window). ``jobs`` is the worker-pool size;
    the assembled table is identical for any value of it.
    """

    t_values: tuple = field(default_factory=lambda: log_axis(*T_RANGE_DEFAULT, 7))
    sigma_values: tuple = field(default_factory=lambda: log_axis(*SIGMA_RANGE_DEFAULT, 7))
    path: tuple = ()
    chi: ChiModel = field(default_factory=ChiModel)
    grid: GridSpec = field(default_factory=GridSpec)
    jobs: int = 1
    tol: float = 0.05
    max_points: int = 3200

    def __post_init__(self):
        problems = []
        object.__setattr__(self, "t_values", _check_axis(self.t_values, "T_I", problems))
        object.__setattr__(
            self, "sigma_values", _check_axis(self.sigma_values, "sigma_e", problems)
        )
        path = tuple((float(t), float(s)) for t, s in self.path)
        for t, s in path:
            ok = t > 0 and s > 0 and math.isfinite(t) and math.isfinite(s)
            if not ok:
                problems.append(f"path points must be positive finite, got ({t!r}, {s!r})")
                break
        object.__setattr__(self, "path", path)
        if not (isinstance(self.jobs, (int, np.integer)) and self.jobs >= 1):
            problems.append(f"jobs must be an integer >= 1, got {self.jobs!r}")
        if not (self.tol >= 0):
            problems.append(f"tol must be >= 0, got {self.tol!r}")
        if problems:
            raise ValidationError(problems)

    def grid_points(self) -> list:
        """Heatmap points in row order: T_I is the slow axis."""
        return [(t, s) for t in self.t_values for s in self.sigma_values]


@dataclass(frozen=True)
class SweepRow:
    """One heatmap entry; ``error`` is None unless the point failed."""

    t_i: float
    sigma_e: float
    h2: float
    kappa: float
    converged: bool
    error: str = None


@dataclass(frozen=True)
class CutRow:
    """One path-cut entry, ordered by position along the path."""

    arc_index: int
    t_i: float
    sigma_e: float
    kappa: float
    converged: bool
    error: str = None


def _evaluate_point(payload) -> dict:
    """Solve one (T_I, sigma_e) point; exceptions become an error record.

    Top-level by necessity: worker pools pickle this function. A failed
    point reports NaN entropy and kappa with ``converged`` false so a
    sweep never aborts on an isolated numerical problem.
    """
    t_i, sigma_e, chi, grid, tol, max_points = payload
    try:
        params = ControlParams(T_I=t_i, sigma_e=sigma_e, chi=chi, grid=grid)
        spectrum = converge_spectrum(params, tol=tol, max_points=max_points)
        return {
            "h2": spectrum.h2,
            "kappa": spectrum.kappa,
            "converged": bool(spectrum.converged),
            "error": None,
        }
    except Exception as exc:
        return {
            "h2": float("nan"),
            "kappa": float("nan"),
            "converged": False,
            "error": f"{type(exc).__name__}: {exc}",
        }


def load_checkpoint(path) -> dict:
    """Read an append-only checkpoint log into {key: result}.

    A truncated final line (interrupted write) is skipped silently; that
    point is simply recomputed.
    """
    done = {}
    if path is None or not os.path.exists(path):
        return done
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                continue
            if "key" in rec:
                done[rec["key"]] = rec
    return done


def _append_checkpoint(fh, key: str, result: dict) -> None:
    if fh is None:
        return
    fh.write(json.dumps({"key": key, **result}, sort_keys=True) + "\n")
    fh.flush()


def _evaluate_many(points, plan: SweepPlan, checkpoint) -> dict:
    """Map {key: result} over the given points, reusing checkpointed rows.

    Duplicate points are solved once. With ``plan.jobs > 1`` the solves
    run in a process pool; the checkpoint appender stays in the parent,
    so the log is written serially no matter the schedule.
    """
    done = load_checkpoint(checkpoint)
    pending = {}
    for t, s in points:
        key = point_key(t, s)
        if key not in done and key not in pending:
            pending[key] = (t, s, plan.chi, plan.grid, plan.tol, plan.max_points)

    fh = open(checkpoint, "a", encoding="utf-8") if checkpoint is not None else None
    try:
        if plan.jobs == 1 or len(pending) <= 1:
            for key, payload in pending.items():
                result = _evaluate_point(payload)
                _append_checkpoint(fh, key, result)
                done[key] = result
        else:
            with ProcessPoolExecutor(max_workers=plan.jobs) as pool:
                futures = {
                    pool.submit(_evaluate_point, payload): key
                    for key, payload in pending.items()
                }
                for fut in as_completed(futures):
                    key = futures[fut]
                    result = fut.result()
                    _append_checkpoint(fh, key, result)
                    done[key] = result
    finally:
        if fh is not None:
            fh.close()
    return done


def run_heatmap(plan: SweepPlan, checkpoint=None) -> list:
    """Solve every (T_I, sigma_e) grid point of the plan.

    Rows come back in deterministic row order (T_I slow, sigma_e fast)
    regardless of the execution schedule, and identical plans yield
    identical rows for any ``jobs``. Pass ``checkpoint`` (a JSONL path)
    to make the sweep resumable: completed points are skipped on restart.

    Returns
    -------
    list of SweepRow
    """
    points = plan.grid_points()
    done = _evaluate_many(points, plan, checkpoint)
    rows = []
    for t, s in points:
        rec = done[point_key(t, s)]
        rows.append(
            SweepRow(
                t_i=t,
                sigma_e=s,
                h2=rec["h2"],
                kappa=rec["kappa"],
                converged=rec["converged"],
                error=rec["error"],
            )
        )
    return rows


def run_path_cut(plan: SweepPlan, checkpoint=None) -> list:
    """Evaluate kappa along the plan's parametric path.

    Returns
    -------
    list of CutRow
        One per path point, indexed by position along the path.
    """
    if not plan.path:
        raise ValidationError("path cut requires a nonempty plan.path")
    done = _evaluate_many(plan.path, plan, checkpoint)
    rows = []
    for idx, (t, s) in enumerate(plan.path):
        rec = done[point_key(t, s)]
        rows.append(
            CutRow(
                arc_index=idx,
                t_i=t,
                sigma_e=s,
                kappa=rec["kappa"],
                converged=rec["converged"],
                error=rec["error"],
            )
        )
    return rows


def write_heatmap_csv(path, rows) -> None:
    """Write heatmap rows as CSV with the standard header."""
    write_csv(
        path,
        HEATMAP_HEADER,
        [[r.t_i, r.sigma_e, r.h2, r.kappa, r.converged] for r in rows],
    )


def write_cut_csv(path, rows) -> None:
    """Write path-cut rows as CSV with the standard header."""
    write_csv(
        path,
        CUT_HEADER,
        [[r.arc_index, r.t_i, r.sigma_e, r.kappa] for r in rows],
    )

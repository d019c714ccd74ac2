"""Discrete-time one-split branching random walk engine.

Growth is sequential by nature: each splitting event removes one uniformly
chosen particle and inserts its offspring cluster.  Particles are kept as a
flat position list (uniform selection is a uniform index; removal reuses the
selected slot for the first offspring), and level counts are materialized
only at snapshot times.  Runs are bit-reproducible given (model, seed): the
PCG64 stream is consumed in a fixed pattern, and replicate r derives its
seed from a 64-bit hash mix of (seed, r).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import models as _models
from .models import ModelSpec

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_CHUNK = 1 << 16


def splitmix64(x: int) -> int:
    x &= _MASK64
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def replicate_seed(seed: int, r: int) -> int:
    """Derived seed for replicate r; r = 0 returns the base seed."""
    if r == 0:
        return seed & _MASK64
    return splitmix64(seed ^ ((r * _GOLDEN) & _MASK64))


def default_schedule(n_target: int, n0: int = 1000, gamma: float = 10.0**0.25) -> list:
    """Geometric snapshot grid n_i = ceil(n0 gamma^i) capped by and always
    including n_target (the theorems live on a log-n scale)."""
    out = set()
    v = float(n0)
    while v < n_target:
        out.add(int(math.ceil(v)))
        v *= gamma
    out.add(n_target)
    return sorted(out)


@dataclass(frozen=True)
class ProfileSnapshot:
    """Level counts L_n(k) recorded after n splitting events.

    `counts[i]` is the number of particles at level `min_level + i`; the
    array covers exactly the occupied range (negative levels allowed).
    """

    n: int
    min_level: int
    counts: np.ndarray
    S: int

    @property
    def w_n(self) -> float:
        return math.log(self.n)

    @property
    def max_level(self) -> int:
        return self.min_level + len(self.counts) - 1

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.min_level, self.min_level + len(self.counts))

    def count_at(self, k: int) -> int:
        i = k - self.min_level
        if 0 <= i < len(self.counts):
            return int(self.counts[i])
        return 0

    def to_dict(self) -> dict:
        return {k: int(v) for k, v in zip(self.levels, self.counts) if v > 0}


@dataclass
class ModeWidthStats:
    """Mode/width of a snapshot plus the second-order predicted location.

    u_n is the smallest argmax level and M_n the maximal count; `tie` marks
    a non-unique argmax.  u_star, theta_n (distance of u_star to the nearest
    integer) and m_tilde (the rescaled width deficiency) are filled by the
    theorem harnesses, which have access to a cumulant estimate.
    """

    u_n: int
    M_n: int
    tie: bool
    u_star: float | None = None
    theta_n: float | None = None
    m_tilde: float | None = None


@dataclass
class RunTrace:
    model_name: str
    seed: int
    n_target: int
    snapshots: list
    schedule: list
    positions: list | None = field(default=None, repr=False)

    @property
    def final(self) -> ProfileSnapshot:
        return self.snapshots[-1]

    def snapshot_at(self, n: int) -> ProfileSnapshot:
        for snap in self.snapshots:
            if snap.n == n:
                return snap
        raise KeyError(f"no snapshot at n = {n}")


def grow(
    model: ModelSpec,
    n_target: int,
    seed: int,
    schedule: Sequence[int] | None = None,
    keep_positions: bool = False,
) -> RunTrace:
    """Run n_target splitting events from one particle at the start position.

    Each event draws a uniform particle and replaces it with one cluster
    draw; snapshots are recorded at the scheduled step counts (the final
    step is always recorded).  Identical (model, seed, n_target, schedule)
    give bit-identical traces.
    """
    if n_target < 0:
        raise ValueError("n_target must be >= 0")
    if schedule is None:
        schedule = default_schedule(n_target)
    final = {n_target} if n_target >= 1 else set()
    points = sorted({int(s) for s in schedule if 0 < int(s) <= n_target} | final)

    rng = np.random.Generator(np.random.PCG64(seed & _MASK64))
    atoms = [offsets for offsets, _ in model.cluster.atoms]
    probs = np.array([float(p) for _, p in model.cluster.atoms])
    single = len(atoms) == 1
    offs0 = atoms[0]

    pos = [model.initial_position]
    S = 1
    done = 0
    snapshots = []
    for target in points:
        while done < target:
            todo = min(_CHUNK, target - done)
            us = rng.random(todo).tolist()
            if single:
                for u in us:
                    i = int(u * S)
                    x = pos[i]
                    pos[i] = x + offs0[0]
                    for z in offs0[1:]:
                        pos.append(x + z)
                    S += len(offs0) - 1
            else:
                draws = rng.choice(len(atoms), size=todo, p=probs).tolist()
                for u, d in zip(us, draws):
                    i = int(u * S)
                    x = pos[i]
                    offs = atoms[d]
                    pos[i] = x + offs[0]
                    for z in offs[1:]:
                        pos.append(x + z)
                    S += len(offs) - 1
            done += todo
        snapshots.append(_snapshot(pos, done))
    if not snapshots:  # n_target == 0
        snapshots.append(_snapshot(pos, 0))
    return RunTrace(
        model_name=model.name,
        seed=seed,
        n_target=n_target,
        snapshots=snapshots,
        schedule=points,
        positions=list(pos) if keep_positions else None,
    )


def _snapshot(pos: list, n: int) -> ProfileSnapshot:
    arr = np.asarray(pos, dtype=np.int64)
    mn = int(arr.min())
    counts = np.bincount(arr - mn)
    return ProfileSnapshot(n=n, min_level=mn, counts=counts, S=len(pos))


def grow_ensemble(
    model: ModelSpec,
    n_target: int,
    seed: int,
    replicates: int,
    schedule: Sequence[int] | None = None,
    jobs: int = 1,
) -> list:
    """Independent replicate runs; replicate r uses replicate_seed(seed, r)."""
    seeds = [replicate_seed(seed, r) for r in range(replicates)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futures = [ex.submit(grow, model, n_target, s, schedule) for s in seeds]
            return [f.result() for f in futures]
    return [grow(model, n_target, s, schedule) for s in seeds]


# ---------------------------------------------------------------------------
# Per-snapshot statistics


def log_laplace(snapshot: ProfileSnapshot, beta: float) -> float:
    """log sum_k L_n(k) e^{beta k}, stabilized."""
    counts = snapshot.counts
    mask = counts > 0
    levels = snapshot.levels[mask].astype(float)
    logs = beta * levels + np.log(counts[mask].astype(float))
    m = logs.max()
    return float(m + np.log(np.exp(logs - m).sum()))


def laplace_W(snapshot: ProfileSnapshot, model: ModelSpec, beta: float) -> float:
    """Normalized Laplace transform W_n(beta) = n^{-phi(beta)} sum L_n(k) e^{beta k}."""
    if snapshot.n < 1:
        raise ValueError("W_n requires n >= 1")
    return math.exp(
        log_laplace(snapshot, beta) - _models.phi_value(model, beta) * snapshot.w_n
    )


def jabbour_J(snapshot: ProfileSnapshot, model: ModelSpec, beta: float) -> float:
    """Mean-one martingale J_n(beta): the raw Laplace transform divided by
    its exact product normalizer (and the start-position factor)."""
    log_alpha = _models.log_jabbour_normalizer(model, snapshot.n, beta)
    return math.exp(
        log_laplace(snapshot, beta) - log_alpha - beta * model.initial_position
    )


def tilted_cumulants(snapshot: ProfileSnapshot, beta: float, J: int) -> list:
    """First J cumulants of the Gibbs measure weighting level k by L_n(k) e^{beta k}.

    At beta = 0 these are the empirical mean, variance, ... of the particle
    positions.  Exact given the snapshot (no numerical differentiation).
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    from .estimators import moments_to_cumulants

    counts = snapshot.counts
    mask = counts > 0
    levels = snapshot.levels[mask].astype(float)
    logs = beta * levels + np.log(counts[mask].astype(float))
    m = logs.max()
    p = np.exp(logs - m)
    p /= p.sum()
    mean = float((p * levels).sum())
    centered = levels - mean
    central = [float((p * centered**j).sum()) for j in range(2, J + 1)]
    return moments_to_cumulants(central, mean)


def mode_width(snapshot: ProfileSnapshot) -> ModeWidthStats:
    """Smallest argmax level and the maximal count; ties flagged."""
    if snapshot.S < 1:
        raise ValueError("empty profile")
    counts = snapshot.counts
    i = int(np.argmax(counts))
    M = int(counts[i])
    tie = int((counts == M).sum()) > 1
    return ModeWidthStats(u_n=i + snapshot.min_level, M_n=M, tie=tie)


def occupation(snapshot: ProfileSnapshot, k: int) -> int:
    return snapshot.count_at(k)


def occupation_centered(snapshot: ProfileSnapshot, model: ModelSpec, k: int) -> float:
    """L_n(k) minus the order-2 mean-expansion proxy for E L_n(k).

    The exact mean profile has no closed form; the centering uses the mean
    Edgeworth expansion at beta = 0 with r = 2, which is accurate to the
    order the occupation-number limit theorems consume.
    """
    if not model.deterministic_offspring:
        raise ValueError("centered occupation requires deterministic offspring counts")
    from .verify import mean_expansion_value

    expected = snapshot.n * mean_expansion_value(model, 2, 0.0, snapshot.n, k)
    return snapshot.count_at(k) - expected


# ---------------------------------------------------------------------------
# Persistence


def save_run(run: RunTrace, out_dir, inline_counts: bool = True) -> str:
    """Write RunTrace JSON (and per-snapshot profile CSVs when not inline).

    Returns the path of the JSON file.  Profile CSV format: header
    `level,count`, rows sorted by level.
    """
    import os

    os.makedirs(out_dir, exist_ok=True)
    base = f"run_{run.model_name.replace(':', '-')}_seed{run.seed}"
    obj: dict = {
        "model": run.model_name,
        "seed": run.seed,
        "n_target": run.n_target,
        "schedule": list(run.schedule),
        "snapshots": [],
    }
    for snap in run.snapshots:
        entry = {
            "n": snap.n,
            "S": snap.S,
            "min_level": snap.min_level,
            "max_level": snap.max_level,
        }
        if inline_counts:
            entry["counts"] = [int(v) for v in snap.counts]
        else:
            csv_path = os.path.join(out_dir, f"{base}_n{snap.n}.csv")
            write_profile_csv(snap, csv_path)
            entry["counts_csv_path"] = os.path.basename(csv_path)
        obj["snapshots"].append(entry)
    if run.positions is not None:
        obj["positions"] = run.positions
    path = os.path.join(out_dir, f"{base}.json")
    from .serialize import write_json

    write_json(obj, path)
    return path


def load_run(path) -> RunTrace:
    import os

    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    snapshots = []
    for entry in obj["snapshots"]:
        if "counts" in entry:
            counts = np.asarray(entry["counts"], dtype=np.int64)
        else:
            csv_path = os.path.join(os.path.dirname(path), entry["counts_csv_path"])
            counts_map = read_profile_csv(csv_path)
            lo = min(counts_map)
            counts = np.zeros(max(counts_map) - lo + 1, dtype=np.int64)
            for k, v in counts_map.items():
                counts[k - lo] = v
        snapshots.append(
            ProfileSnapshot(
                n=entry["n"], min_level=entry["min_level"], counts=counts, S=entry["S"]
            )
        )
    return RunTrace(
        model_name=obj["model"],
        seed=obj["seed"],
        n_target=obj["n_target"],
        snapshots=snapshots,
        schedule=obj.get("schedule", [s.n for s in snapshots]),
        positions=obj.get("positions"),
    )


def write_profile_csv(snapshot: ProfileSnapshot, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "count"])
        for k, v in zip(snapshot.levels, snapshot.counts):
            if v > 0:
                writer.writerow([int(k), int(v)])


def read_profile_csv(path) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out[int(row["level"])] = int(row["count"])
    return out

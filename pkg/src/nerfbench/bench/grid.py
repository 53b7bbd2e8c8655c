"""Grid search over seed x learning rate x encoding frequencies."""
from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from ..assets import DEFAULT_GRID
from ..metrics import psnr
from ..tinynerf import (EncodingConfig, RenderConfig, TrainConfig, TrainingDiverged,
                        loss_mse, render_view, train)
from ..tinynerf.train import split_holdout

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    seeds: tuple
    learning_rates: tuple
    n_freqs: tuple

    def __post_init__(self):
        for name in ("seeds", "learning_rates", "n_freqs"):
            vals = tuple(getattr(self, name))
            if not vals:
                raise ValueError(f"grid spec field {name!r} is empty")
            object.__setattr__(self, name, vals)
        if any(not lr > 0 for lr in self.learning_rates):
            raise ValueError(f"learning rates must be positive, got {self.learning_rates}")
        if any(n < 0 for n in self.n_freqs):
            raise ValueError(f"frequency counts must be >= 0, got {self.n_freqs}")

    def __len__(self):
        return len(self.seeds) * len(self.learning_rates) * len(self.n_freqs)

    def cells(self):
        """(seed, lr, L) in seed-major, then learning-rate, then L order."""
        return [(s, lr, n) for s in self.seeds for lr in self.learning_rates for n in self.n_freqs]

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        missing = {"seeds", "lrs", "freqs"} - set(d)
        if missing:
            raise ValueError(f"grid spec is missing keys {sorted(missing)}")
        return cls(tuple(int(s) for s in d["seeds"]), tuple(float(x) for x in d["lrs"]),
                   tuple(int(n) for n in d["freqs"]))

    @classmethod
    def load(cls, path) -> "GridSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))

    @classmethod
    def default(cls) -> "GridSpec":
        """The 36-cell search: 3 seeds x 3 learning rates x 4 encodings."""
        return cls.from_dict(DEFAULT_GRID)

    def to_dict(self) -> dict:
        return {"seeds": list(self.seeds), "lrs": list(self.learning_rates), "freqs": list(self.n_freqs)}


@dataclass
class GridCellResult:
    id: int
    seed: int
    lr: float
    n_freqs: int
    loss: float
    psnr_db: float
    wall_time_s: float
    diverged: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GridCellResult":
        return cls(**d)


def evaluate_holdout(model, dataset, render_cfg: RenderConfig, holdout=-1) -> float:
    _, hold = split_holdout(len(dataset.frames), holdout)
    frame = dataset.frames[hold if hold is not None else 0]
    bg = (1.0, 1.0, 1.0) if render_cfg.white_background else dataset.background
    pred = render_view(model, frame.cam, frame.pose, replace(render_cfg, stratified=False), background=bg)
    return loss_mse(pred, frame.rgb)


def run_cell(dataset, cell_id: int, seed: int, lr: float, n_freqs: int, render_cfg: RenderConfig,
             n_iters: int, rays_per_batch=None) -> GridCellResult:
    cfg = TrainConfig(seed=seed, learning_rate=lr, n_iters=n_iters, rays_per_batch=rays_per_batch,
                      eval_every=max(n_iters, 1), encoding=EncodingConfig(n_freqs))
    t0 = time.perf_counter()
    try:
        model, history = train(dataset, cfg, render_cfg)
    except TrainingDiverged as exc:
        log.warning("cell %d diverged: %s", cell_id, exc)
        return GridCellResult(cell_id, seed, lr, n_freqs, math.nan, math.nan,
                              time.perf_counter() - t0, diverged=True)
    loss = history[-1].loss if history else evaluate_holdout(model, dataset, render_cfg)
    elapsed = time.perf_counter() - t0
    log.info("cell %d seed=%d lr=%g L=%d loss=%.4f psnr=%.4f (%.1fs)",
             cell_id, seed, lr, n_freqs, loss, psnr(loss), elapsed)
    return GridCellResult(cell_id, seed, lr, n_freqs, loss, psnr(loss), elapsed)


def run_grid(dataset, spec: GridSpec, render_cfg: RenderConfig, n_iters: int = 5000,
             rays_per_batch=None, threads: int = 1) -> list:
    """Train one model per grid cell; ids start at 1 in seed-major order.

    Cells own their random streams, so running them on several threads gives
    the same table as running them in order.
    """
    jobs = [(i + 1, *cell) for i, cell in enumerate(spec.cells())]

    def work(job):
        cid, seed, lr, n = job
        return run_cell(dataset, cid, seed, lr, n, render_cfg, n_iters, rays_per_batch)

    if threads <= 1:
        return [work(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, jobs))


def average_by(results, keys=("lr", "n_freqs")) -> list:
    """Group results over the remaining factors and average loss and PSNR.

    Groups appear in first-seen order. Diverged cells are counted but left out
    of the means. Besides the mean PSNR, each row carries the PSNR of the
    group's mean loss, which is how the reference averaged table was built.
    """
    results = list(results)
    if not results:
        raise ValueError("no results to average")
    groups: dict = {}
    for r in results:
        groups.setdefault(tuple(getattr(r, k) for k in keys), []).append(r)
    rows = []
    for key, members in groups.items():
        ok = [m for m in members if not m.diverged]
        mean_loss = math.fsum(m.loss for m in ok) / len(ok) if ok else math.nan
        mean_psnr = math.fsum(m.psnr_db for m in ok) / len(ok) if ok else math.nan
        row = dict(zip(keys, key))
        row.update(loss=mean_loss, psnr_db=mean_psnr,
                   psnr_of_mean_loss_db=psnr(mean_loss) if ok else math.nan,
                   count=len(members), diverged=len(members) - len(ok))
        rows.append(row)
    return rows

"""Adversarial training for every objective kind, and the fixed-discriminator experiment."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field

import numpy as np

from ._rng import make_rng
from .nn import MlpModel, frozen, mlp_specs
from .objectives import (
    ObjectiveKind,
    discriminator_loss,
    generator_loss,
    generator_objective,
)
from .optim import make_optimizer
from .tensor import DomainError, NonFiniteError, as_matrix

CURVE_BATCH = 16_000


@dataclass
class GanConfig:
    objective: ObjectiveKind = ObjectiveKind.MIM
    latent_dim: int = 8
    gen_hidden: tuple = (64,)
    disc_hidden: tuple = (64,)
    g_optimizer: str = "adam"
    g_lr: float = 1e-3
    d_optimizer: str = "adam"
    d_lr: float = 1e-3
    adam_beta1: float = 0.9
    batch_size: int = 256
    iterations: int = 2000
    d_steps_per_g_step: int = 1
    seed: int = 0
    w_clip: float = 0.01

    def __post_init__(self):
        self.objective = ObjectiveKind(self.objective)
        self.gen_hidden = tuple(int(h) for h in self.gen_hidden)
        self.disc_hidden = tuple(int(h) for h in self.disc_hidden)
        if self.latent_dim < 1 or self.batch_size < 1 or self.d_steps_per_g_step < 1:
            raise ValueError("latent_dim, batch_size and d_steps_per_g_step must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if self.w_clip <= 0:
            raise ValueError("w_clip must be positive")

    def gen_layers(self, data_dim: int):
        return mlp_specs((self.latent_dim, *self.gen_hidden, data_dim), "leaky-relu", "tanh")

    def disc_layers(self, data_dim: int):
        head = "sigmoid" if self.objective.bounded else "identity"
        return mlp_specs((data_dim, *self.disc_hidden, 1), "leaky-relu", head)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["objective"] = self.objective.value
        d["gen_hidden"] = list(self.gen_hidden)
        d["disc_hidden"] = list(self.disc_hidden)
        return d


@dataclass
class TrainingLog:
    iteration: list[int] = field(default_factory=list)
    d_loss: list[float] = field(default_factory=list)
    g_loss: list[float] = field(default_factory=list)
    g_objective: list[float] = field(default_factory=list)

    def append(self, it, d_loss, g_loss, g_obj) -> None:
        if self.iteration and it <= self.iteration[-1]:
            raise ValueError("iteration indices must increase")
        self.iteration.append(int(it))
        self.d_loss.append(float(d_loss))
        self.g_loss.append(float(g_loss))
        self.g_objective.append(float(g_obj))

    def __len__(self) -> int:
        return len(self.iteration)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "d_loss", "g_loss", "g_objective"])
            for row in zip(self.iteration, self.d_loss, self.g_loss, self.g_objective):
                w.writerow([row[0], *(repr(v) for v in row[1:])])

    @classmethod
    def from_csv(cls, path) -> "TrainingLog":
        log = cls()
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                log.append(int(rec["iteration"]), float(rec["d_loss"]),
                           float(rec["g_loss"]), float(rec["g_objective"]))
        return log


class TrainingDiverged(RuntimeError):
    """A loss became non-finite; ``log`` holds the records up to that point."""

    def __init__(self, message: str, log: TrainingLog, iteration: int):
        super().__init__(message)
        self.log = log
        self.iteration = iteration


class _Game:
    """Models, optimizers and random stream for one training run."""

    def __init__(self, cfg: GanConfig, data: np.ndarray):
        self.cfg = cfg
        self.kind = cfg.objective
        self.data = data
        dim = data.shape[1]
        self.G = MlpModel.init(cfg.gen_layers(dim), cfg.seed, "generator")
        self.G.set_output_range(data.min(axis=0), data.max(axis=0))
        self.D = MlpModel.init(cfg.disc_layers(dim), cfg.seed, "discriminator")
        beta = {"beta1": cfg.adam_beta1} if cfg.d_optimizer == "adam" else {}
        self.opt_d = make_optimizer(cfg.d_optimizer, self.D.parameters(), cfg.d_lr, **beta)
        beta = {"beta1": cfg.adam_beta1} if cfg.g_optimizer == "adam" else {}
        self.opt_g = make_optimizer(cfg.g_optimizer, self.G.parameters(), cfg.g_lr, **beta)
        self.rng = make_rng(cfg.seed, "train")

    def latent(self, n: int) -> np.ndarray:
        return self.rng.standard_normal((n, self.cfg.latent_dim))

    def real(self, n: int) -> np.ndarray:
        return self.data[self.rng.integers(0, self.data.shape[0], size=n)]

    def d_step(self, n: int) -> float:
        x_real = self.real(n)
        x_fake = self.G.predict(self.latent(n))
        self.D.zero_grad()
        loss = discriminator_loss(self.kind, self.D(x_real), self.D(x_fake))
        loss.backward()
        self.opt_d.step()
        if self.kind is ObjectiveKind.W:
            c = self.cfg.w_clip
            for p in self.D.parameters():
                p.value = np.clip(p.value, -c, c)
        return loss.item()

    def g_step(self, n: int) -> tuple[float, float]:
        self.G.zero_grad()
        self.D.zero_grad()
        d_fake = self.D(self.G(self.latent(n)))
        loss = generator_loss(self.kind, d_fake)
        loss.backward()
        self.opt_g.step()
        return loss.item(), generator_objective(self.kind, d_fake.detach())

    def d_loss_eval(self, n: int) -> float:
        x_real = self.real(n)
        x_fake = self.G.predict(self.latent(n))
        return discriminator_loss(self.kind, self.D.predict(x_real), self.D.predict(x_fake)).item()


def _run(game: _Game, iterations: int, log: TrainingLog, *, batch: int,
         frozen_d_loss: float | None = None) -> None:
    for it in range(iterations):
        try:
            if frozen_d_loss is None:
                for _ in range(game.cfg.d_steps_per_g_step):
                    d_loss = game.d_step(batch)
            else:
                d_loss = frozen_d_loss
            g_loss, g_obj = game.g_step(batch)
        except (NonFiniteError, DomainError) as exc:
            raise TrainingDiverged(f"iteration {it}: {exc}", log, it) from exc
        log.append(it, d_loss, g_loss, g_obj)


def _as_data(data) -> np.ndarray:
    x = getattr(data, "features", data)
    x = as_matrix(x, "data")
    if x.shape[0] == 0:
        raise ValueError("training data is empty")
    return x


def train_adversarial(cfg: GanConfig, data):
    """Alternate discriminator and generator descent steps.

    Returns ``(generator, discriminator, log)``.  The generator's tanh head
    is stretched over the per-feature min/max of ``data``.
    """
    game = _Game(cfg, _as_data(data))
    log = TrainingLog()
    _run(game, cfg.iterations, log, batch=cfg.batch_size)
    return game.G, game.D, log


def train_generator_fixed_discriminator(cfg: GanConfig, data, d_pretrain_iters: int,
                                        g_iters: int, curve_batch: int = CURVE_BATCH,
                                        return_models: bool = False):
    """Pretrain both players, then freeze D and train only G.

    Phase 1 runs ``d_pretrain_iters`` ordinary iterations at
    ``cfg.batch_size``; phase 2 runs ``g_iters`` generator steps on
    ``curve_batch`` fresh latent draws each.  The returned log covers
    phase 2 only; its ``d_loss`` column repeats the frozen discriminator's
    loss measured once at the freeze point.
    """
    if d_pretrain_iters < 0 or g_iters < 0:
        raise ValueError("iteration counts must be non-negative")
    game = _Game(cfg, _as_data(data))
    _run(game, d_pretrain_iters, TrainingLog(), batch=cfg.batch_size)
    log = TrainingLog()
    if g_iters:
        try:
            d_loss = game.d_loss_eval(curve_batch)
        except (NonFiniteError, DomainError) as exc:
            raise TrainingDiverged(f"discriminator at freeze: {exc}", log, 0) from exc
        with frozen(game.D):
            _run(game, g_iters, log, batch=curve_batch, frozen_d_loss=d_loss)
    if return_models:
        return log, game.G, game.D
    return log


def sample(generator: MlpModel, n: int, seed: int) -> np.ndarray:
    """``n`` generated rows from standard-normal latent draws."""
    if n < 0:
        raise ValueError("n must be non-negative")
    z = make_rng(seed, "sample").standard_normal((n, generator.in_dim))
    if n == 0:
        return np.zeros((0, generator.out_dim))
    return generator.predict(z)


def trailing_variance(values, window: int) -> float:
    v = np.asarray(values, dtype=np.float64)
    if v.size < window:
        raise ValueError(f"need at least {window} values, got {v.size}")
    return float(np.var(v[-window:]))

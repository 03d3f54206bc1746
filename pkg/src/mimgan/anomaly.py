"""GAN-based anomaly scoring.

A test row ``x`` is mapped back into latent space by Adam descent on

    J(x, z) = (1 - lam) * ||x - G(z)||_p + lam * H(D(G(z)), 1)

where ``H(d, beta)`` is the sigmoid cross-entropy of the discriminator's
output.  The score is ``(1 - eta) * J(x, z_opt) + eta * H(D(x), 1)`` and
rows scoring strictly above a threshold are flagged as anomalies.

Rows are processed as a batch: the loss is the sum of the per-row losses,
so each row's latent gradient and Adam trajectory are independent.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import tensor as T
from ._rng import make_rng
from .metrics import f1_score
from .nn import MlpModel, frozen
from .optim import Adam
from .tensor import NonFiniteError, ShapeError, Tensor, as_matrix

AUTO = "auto"


@dataclass(frozen=True)
class AnomalyConfig:
    lam: float = 0.1
    eta: float = 0.05
    beta: float = 1.0
    p_norm: int = 2
    inversion_lr: float = 0.003
    inversion_iters: int = 500
    threshold: float | str = AUTO
    max_restarts: int = 3
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.lam < 1:
            raise ValueError("lam must lie in (0, 1)")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if self.p_norm < 1:
            raise ValueError("p_norm must be a positive integer")
        if self.inversion_iters < 0:
            raise ValueError("inversion_iters must be non-negative")
        if self.threshold != AUTO and not math.isfinite(float(self.threshold)):
            raise ValueError("threshold must be finite or 'auto'")


@dataclass(frozen=True)
class ScoredSample:
    id: int | str
    score: float
    decision: int | None = None
    truth: int | None = None


def sigmoid_cross_entropy(d, beta: float = 1.0):
    """``-beta ln s(d) - (1-beta) ln(1-s(d))`` with ``s`` the logistic sigmoid.

    Works on floats, arrays or tensors (the tensor form stays differentiable).
    """
    if isinstance(d, Tensor):
        out = beta * T.softplus(-d)
        if beta != 1.0:
            out = out + (1.0 - beta) * T.softplus(d)
        return out
    d = np.asarray(d, dtype=np.float64)
    out = beta * np.logaddexp(0.0, -d) + (1.0 - beta) * np.logaddexp(0.0, d)
    return float(out) if out.ndim == 0 else out


def _residual_norm(x: np.ndarray, gz: Tensor, p: int) -> Tensor:
    return T.norm(T.add(Tensor(x), gz, beta=-1.0), p)


def _j_error(x: np.ndarray, z: Tensor, G: MlpModel, D: MlpModel, cfg: AnomalyConfig) -> Tensor:
    gz = G(z)
    return ((1.0 - cfg.lam) * _residual_norm(x, gz, cfg.p_norm)
            + cfg.lam * sigmoid_cross_entropy(D(gz), cfg.beta))


def _rows(x, dim: int, name: str) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    arr = as_matrix(arr, name)
    if arr.shape[1] != dim:
        raise ShapeError(f"{name} has {arr.shape[1]} columns, expected {dim}")
    return arr, single


def reconstruction_loss(x, z, G: MlpModel, D: MlpModel, cfg: AnomalyConfig):
    """``J(x, z)`` per row (a float for a single sample)."""
    x, single = _rows(x, G.out_dim, "x")
    z, _ = _rows(z, G.in_dim, "z")
    if x.shape[0] != z.shape[0]:
        raise ShapeError("x and z have different numbers of rows")
    j = _j_error(x, Tensor(z), G, D, cfg).value[:, 0]
    return float(j[0]) if single else j


def _initial_latent(ids, dim: int, seed: int, restart: int) -> np.ndarray:
    return np.vstack([make_rng(seed, "invert", i, restart).standard_normal(dim) for i in ids])


def _descend(x, z0, G, D, cfg: AnomalyConfig):
    """Adam on z from ``z0``.

    Returns ``(best z, best J, diverged)`` per batch; on a non-finite value
    the descent stops and reports the best finite point seen so far.
    """
    z = Tensor(z0.copy(), requires_grad=True)
    opt = Adam([z], lr=cfg.inversion_lr)
    best_z = z0.copy()
    best_j = np.full(x.shape[0], np.inf)
    try:
        for step in range(cfg.inversion_iters + 1):
            j = _j_error(x, z, G, D, cfg)
            jv = j.value[:, 0]
            better = jv < best_j
            best_j[better] = jv[better]
            best_z[better] = z.value[better]
            if step == cfg.inversion_iters:
                break
            z.zero_grad()
            T.sum(j).backward()
            opt.step()
    except NonFiniteError:
        return best_z, best_j, True
    return best_z, best_j, False


def invert_latent(x, G: MlpModel, D: MlpModel, cfg: AnomalyConfig, ids=None):
    """Latent codes minimizing ``J(x, z)``, best-seen over the descent.

    Each row starts from a standard-normal draw keyed by ``(cfg.seed, id)``,
    so results do not depend on row order.  If a descent turns non-finite,
    the row is restarted from a fresh draw, at most ``cfg.max_restarts``
    times, and the best finite point found is kept.
    """
    x, single = _rows(x, G.out_dim, "x")
    ids = list(range(x.shape[0])) if ids is None else list(ids)
    if len(ids) != x.shape[0]:
        raise ShapeError("ids and x have different lengths")
    with frozen(G, D):
        z, _, diverged = _descend(x, _initial_latent(ids, G.in_dim, cfg.seed, 0), G, D, cfg)
        if diverged:
            z = np.vstack([_invert_one(x[i:i + 1], ids[i], G, D, cfg) for i in range(len(ids))])
    return z[0] if single else z


def _invert_one(x, sid, G, D, cfg):
    best_z, best_j = _initial_latent([sid], G.in_dim, cfg.seed, 0), np.inf
    for restart in range(cfg.max_restarts + 1):
        z, j, diverged = _descend(x, _initial_latent([sid], G.in_dim, cfg.seed, restart), G, D, cfg)
        if j[0] < best_j:
            best_z, best_j = z, j[0]
        if not diverged:
            break
    return best_z[0]


def anomaly_score(x, z_opt, G: MlpModel, D: MlpModel, cfg: AnomalyConfig):
    """``(1-eta) J(x, z_opt) + eta H(D(x), 1)`` per row."""
    x, single = _rows(x, G.out_dim, "x")
    j = np.atleast_1d(reconstruction_loss(x, z_opt, G, D, cfg))
    h = sigmoid_cross_entropy(D.predict(x)[:, 0], cfg.beta)
    s = (1.0 - cfg.eta) * j + cfg.eta * np.atleast_1d(h)
    return float(s[0]) if single else s


def score_samples(x, G: MlpModel, D: MlpModel, cfg: AnomalyConfig, ids=None, truth=None):
    """Invert and score every row; returns a list of :class:`ScoredSample`."""
    x, _ = _rows(x, G.out_dim, "x")
    ids = list(range(x.shape[0])) if ids is None else list(ids)
    if x.shape[0] == 0:
        return []
    z = invert_latent(x, G, D, cfg, ids)
    scores = anomaly_score(x, z, G, D, cfg)
    truth = [None] * len(ids) if truth is None else [int(t) for t in truth]
    return [ScoredSample(i, float(s), None, t) for i, s, t in zip(ids, scores, truth)]


def best_f1_threshold(scores, labels) -> float:
    """Threshold (a score value) whose strict decision rule maximizes F1.

    Flagging every row is represented by the largest float below the
    minimum score.  Ties in F1 go to the higher threshold.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=int)
    candidates = np.r_[np.nextafter(s.min(), -np.inf), np.unique(s)]
    best, best_f1 = candidates[0], -1.0
    for t in candidates:
        f1 = f1_score((s > t).astype(int), y)
        if f1 >= best_f1:
            best, best_f1 = t, f1
    return float(best)


def classify(samples, gamma=AUTO, validation=None):
    """Label ``decision = 1`` iff ``score > gamma``.

    ``gamma="auto"`` picks the max-F1 threshold on ``validation`` (default:
    ``samples`` themselves), which must carry ground-truth labels.
    Returns ``(labeled samples, threshold)``.
    """
    samples = list(samples)
    for s in samples:
        if not math.isfinite(s.score):
            raise ValueError(f"sample {s.id}: non-finite score")
    if isinstance(gamma, str):
        if gamma != AUTO:
            raise ValueError(f"threshold must be a number or 'auto', got {gamma!r}")
        val = samples if validation is None else list(validation)
        if not val or any(s.truth is None for s in val):
            raise ValueError("automatic threshold needs labeled validation samples")
        truth = [s.truth for s in val]
        if 1 not in truth:
            raise ValueError("automatic threshold needs at least one anomaly in validation")
        gamma = best_f1_threshold([s.score for s in val], truth)
    gamma = float(gamma)
    return [replace(s, decision=int(s.score > gamma)) for s in samples], gamma


def write_score_report(samples, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "score", "decision", "truth"])
        for s in samples:
            w.writerow([s.id, repr(s.score), "" if s.decision is None else s.decision,
                        "" if s.truth is None else s.truth])


def read_score_report(path) -> list[ScoredSample]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"id", "score", "decision", "truth"} - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for r, rec in enumerate(reader, start=1):
            try:
                score = float(rec["score"])
            except ValueError:
                raise ValueError(f"{path}: bad score at row {r}") from None
            dec = int(rec["decision"]) if rec["decision"] not in ("", None) else None
            truth = int(rec["truth"]) if rec["truth"] not in ("", None) else None
            sid = int(rec["id"]) if rec["id"].lstrip("-").isdigit() else rec["id"]
            out.append(ScoredSample(sid, score, dec, truth))
    return out


def summary(samples, threshold: float, cfg: AnomalyConfig) -> dict:
    flagged = sum(1 for s in samples if s.decision == 1)
    out = {
        "threshold": threshold,
        "n": len(samples),
        "flagged": flagged,
        "config": asdict(cfg),
    }
    if samples and all(s.truth is not None for s in samples):
        out["true_anomalies"] = sum(s.truth for s in samples)
    return out


def write_summary(d: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(d, fh, indent=2, sort_keys=True)
        fh.write("\n")

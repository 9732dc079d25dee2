"""Uncertainty-weighted multi-task loss with analytic gradients.

Heatmap channels use ``r / (2 sigma^2) + log(1 + sigma)`` with ``r`` the
per-channel mean squared error (or its square root when ``squared`` is
off).  Each segmentation task uses ``CE / sigma + log(sigma)`` with ``CE``
the mean per-pixel cross-entropy of the softmaxed logits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import N_CHANNELS, IconClass, RoomClass
from .errors import InvalidLabel, NonPositiveSigma, ShapeMismatch


@dataclass(frozen=True)
class UncertaintyParams:
    sigma_heatmap: tuple[float, ...] = (1.0,) * N_CHANNELS
    sigma_rooms: float = 1.0
    sigma_icons: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "sigma_heatmap", tuple(float(s) for s in self.sigma_heatmap))
        if len(self.sigma_heatmap) != N_CHANNELS:
            raise ShapeMismatch(f"expected {N_CHANNELS} heatmap sigmas, got {len(self.sigma_heatmap)}")
        _check_sigmas(self.sigma_heatmap + (self.sigma_rooms, self.sigma_icons))


def _check_sigmas(values):
    for s in values:
        if not (math.isfinite(s) and s > 0):
            raise NonPositiveSigma(f"sigma must be finite and > 0, got {s}")


@dataclass(frozen=True)
class HeatmapTerm:
    per_channel: np.ndarray   # (C,)
    residuals: np.ndarray     # (C,) r_i
    grad_pred: np.ndarray     # (C, H, W)
    grad_sigma: np.ndarray    # (C,)

    @property
    def value(self) -> float:
        return float(self.per_channel.sum())


@dataclass(frozen=True)
class SegmentationTerm:
    value: float
    cross_entropy: float
    grad_logits: np.ndarray   # (C, H, W)
    grad_sigma: float


@dataclass(frozen=True)
class LossBreakdown:
    total: float
    per_channel_heatmap: tuple[float, ...]
    rooms_term: float
    icons_term: float
    gradients: dict = field(default_factory=dict, compare=False)


def heatmap_uncertainty_loss(pred, target, sigmas, squared: bool = True) -> HeatmapTerm:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    sig = np.asarray(sigmas, dtype=np.float64).reshape(-1)
    if pred.shape != target.shape or pred.ndim != 3:
        raise ShapeMismatch(f"pred {pred.shape} and target {target.shape} must be equal C x H x W")
    if sig.size != pred.shape[0]:
        raise ShapeMismatch(f"{sig.size} sigmas for {pred.shape[0]} channels")
    _check_sigmas(sig.tolist())
    c, h, w = pred.shape
    diff = pred - target
    mse = (diff * diff).reshape(c, -1).mean(axis=1)
    if squared:
        r = mse
        dr = diff * (2.0 / (h * w))
    else:
        r = np.sqrt(mse)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(r > 0, 1.0 / (h * w * r), 0.0)
        dr = diff * scale[:, None, None]
    per = r / (2 * sig ** 2) + np.log1p(sig)
    grad_pred = dr / (2 * sig ** 2)[:, None, None]
    grad_sigma = -r / sig ** 3 + 1.0 / (1.0 + sig)
    return HeatmapTerm(per, r, grad_pred, grad_sigma)


def segmentation_uncertainty_loss(logits, labels, sigma: float) -> SegmentationTerm:
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    if logits.ndim != 3 or labels.shape != logits.shape[1:]:
        raise ShapeMismatch(f"logits {logits.shape} do not match labels {labels.shape}")
    _check_sigmas([float(sigma)])
    c, h, w = logits.shape
    if labels.size and (not np.issubdtype(labels.dtype, np.integer)
                        or labels.min() < 0 or labels.max() >= c):
        raise InvalidLabel(f"labels must be integer codes in [0, {c})")
    shifted = logits - logits.max(axis=0, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=0))
    log_p = shifted - log_z
    rows, cols = np.indices((h, w))
    ce = float(-log_p[labels, rows, cols].mean())
    soft = np.exp(log_p)
    soft[labels, rows, cols] -= 1.0
    grad_logits = soft / (sigma * h * w)
    value = ce / sigma + math.log(sigma)
    return SegmentationTerm(value, ce, grad_logits, -ce / sigma ** 2 + 1.0 / sigma)


def total_loss(pred_heatmaps, target_heatmaps, room_logits, room_labels,
               icon_logits, icon_labels, params: UncertaintyParams = UncertaintyParams(),
               squared: bool = True) -> LossBreakdown:
    if np.shape(room_logits)[0] != len(RoomClass) or np.shape(icon_logits)[0] != len(IconClass):
        raise ShapeMismatch(f"room/icon logits need {len(RoomClass)}/{len(IconClass)} channels")
    hm = heatmap_uncertainty_loss(pred_heatmaps, target_heatmaps, params.sigma_heatmap, squared)
    rooms = segmentation_uncertainty_loss(room_logits, room_labels, params.sigma_rooms)
    icons = segmentation_uncertainty_loss(icon_logits, icon_labels, params.sigma_icons)
    per = tuple(float(v) for v in hm.per_channel)
    return LossBreakdown(
        total=math.fsum(per + (rooms.value, icons.value)),
        per_channel_heatmap=per,
        rooms_term=rooms.value,
        icons_term=icons.value,
        gradients={
            "heatmaps": hm.grad_pred,
            "room_logits": rooms.grad_logits,
            "icon_logits": icons.grad_logits,
            "sigma_heatmap": hm.grad_sigma,
            "sigma_rooms": rooms.grad_sigma,
            "sigma_icons": icons.grad_sigma,
        },
    )


def heatmap_term(r: float, sigma: float) -> float:
    return r / (2 * sigma ** 2) + math.log1p(sigma)


def optimal_sigma(r: float, tol: float = 1e-13) -> float:
    """Positive root of ``-r/sigma^3 + 1/(1 + sigma)`` by bisection.

    Clearing denominators gives ``sigma^3 - r (1 + sigma)``, negative at 0
    and positive at ``1 + r``, with exactly one sign change on the way.
    """
    if not r > 0:
        raise ValueError("residual must be > 0")
    lo, hi = 0.0, 1.0 + r
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid ** 3 - r * (1 + mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def finite_difference_check(fn, x: np.ndarray, grad: np.ndarray, step: float = 1e-4) -> float:
    """Relative error ``|g - fd| / max(|g|, |fd|)`` (Euclidean norms) against central differences.

    ``fn`` maps an array shaped like ``x`` to a scalar; ``x`` is not modified.
    """
    x = np.array(x, dtype=np.float64)
    flat = x.reshape(-1)
    g = np.asarray(grad, dtype=np.float64).reshape(-1)
    fd = np.empty_like(g)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + step
        up = fn(x)
        flat[k] = orig - step
        down = fn(x)
        flat[k] = orig
        fd[k] = (up - down) / (2 * step)
    scale = max(float(np.linalg.norm(g)), float(np.linalg.norm(fd)))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(g - fd)) / scale


def directional_check(fn, x: np.ndarray, grad: np.ndarray, n_directions: int = 8,
                      step: float = 1e-4, seed: int = 0) -> float:
    """Worst relative error of ``grad . v`` against central differences along random unit ``v``.

    Costs two evaluations per direction, so it suits full-size tensors.
    """
    rng = np.random.default_rng(seed)
    x = np.asarray(x, dtype=np.float64)
    g = np.asarray(grad, dtype=np.float64)
    worst = 0.0
    for _ in range(n_directions):
        v = rng.normal(size=x.shape)
        v /= np.linalg.norm(v)
        fd = (fn(x + step * v) - fn(x - step * v)) / (2 * step)
        an = float((g * v).sum())
        scale = max(abs(an), abs(fd))
        if scale > 0:
            worst = max(worst, abs(an - fd) / scale)
    return worst

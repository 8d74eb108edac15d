"""Capacity vectors: colour histograms, Gaussian noise and synthetic sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .mot_graph import Detection

DEFAULT_BINS = 8


def color_histogram(region, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Per-channel intensity histogram of an RGB block, R|G|B, each channel summing to 1.

    Bin ``b`` of a channel covers intensities ``[256 b / B, 256 (b+1) / B)``.
    """
    arr = np.asarray(region)
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB block, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("empty image region")
    pix = np.clip(arr.reshape(-1, 3).astype(np.float64), 0, 255)
    idx = np.minimum((pix * bins / 256.0).astype(np.int64), bins - 1)
    out = np.empty(3 * bins)
    for c in range(3):
        counts = np.bincount(idx[:, c], minlength=bins).astype(np.float64)
        out[c * bins:(c + 1) * bins] = counts / counts.sum()
    return out


def crop(image: np.ndarray, box) -> np.ndarray:
    """Pixels under ``box`` (left, top, width, height), clipped to the image."""
    h, w = image.shape[:2]
    left, top, bw, bh = box
    x0, y0 = max(0, int(math.floor(left))), max(0, int(math.floor(top)))
    x1, y1 = min(w, int(math.ceil(left + bw))), min(h, int(math.ceil(top + bh)))
    return image[y0:y1, x0:x1]


def read_image(path) -> np.ndarray:
    """Load a PPM (P6) or PNG file (anything Pillow reads) as an RGB uint8 array."""
    from PIL import Image

    with Image.open(Path(path)) as im:
        return np.asarray(im.convert("RGB"))


def add_noise(values, sigma: float, seed=None, mode: str = "feature") -> np.ndarray:
    """Perturbed copy with i.i.d. N(0, sigma^2) noise per entry.

    ``mode="feature"`` clamps at 0 so capacities stay non-negative;
    ``mode="image"`` clamps to [0, 255] and keeps integer dtypes.
    ``seed`` may be an int or a :class:`numpy.random.Generator`.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if mode not in ("feature", "image"):
        raise ValueError(f"unknown noise mode {mode!r}")
    arr = np.asarray(values)
    if sigma == 0:
        return arr.copy()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    noisy = arr.astype(np.float64) + rng.normal(0.0, sigma, size=arr.shape)
    if mode == "feature":
        return np.maximum(noisy, 0.0)
    noisy = np.clip(noisy, 0, 255)
    if np.issubdtype(arr.dtype, np.integer):
        return np.rint(noisy).astype(arr.dtype)
    return noisy


@dataclass(frozen=True)
class SyntheticSpec:
    """Objects moving on straight lines with fixed ground-truth features.

    Each frame observes ``clamp(gt_feature + sigma * scale * z)`` per object,
    where ``scale`` is ``stable_scale`` on the object's stable dimensions and
    1 elsewhere.  Noise draws do not depend on ``sigma``, so runs that differ
    only in ``sigma`` share their random numbers.
    """

    gt_features: tuple[tuple[float, ...], ...]
    starts: tuple[tuple[float, float], ...]
    velocities: tuple[tuple[float, float], ...]
    n_frames: int
    sigma: float = 0.0
    seed: int = 0
    stable_dims: tuple[tuple[int, ...], ...] = ()
    stable_scale: float = 0.1
    box_size: tuple[float, float] = (40.0, 80.0)
    object_ids: tuple[int, ...] | None = None

    def __post_init__(self):
        n = len(self.gt_features)
        if n < 1 or self.n_frames < 1:
            raise ValueError("need at least one object and one frame")
        k = len(self.gt_features[0])
        if k < 1 or any(len(f) != k for f in self.gt_features):
            raise ValueError("ground-truth features must share a length k >= 1")
        if any(x < 0 for f in self.gt_features for x in f):
            raise ValueError("ground-truth features must be non-negative")
        if len(self.starts) != n or len(self.velocities) != n:
            raise ValueError("one start and one velocity per object")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.stable_dims and len(self.stable_dims) != n:
            raise ValueError("stable_dims needs one entry per object")
        if self.object_ids is not None:
            if len(self.object_ids) != n or len(set(self.object_ids)) != n:
                raise ValueError("object ids must be unique, one per object")

    @property
    def n_objects(self) -> int:
        return len(self.gt_features)

    @property
    def k(self) -> int:
        return len(self.gt_features[0])

    def with_sigma(self, sigma: float) -> "SyntheticSpec":
        from dataclasses import replace

        return replace(self, sigma=sigma)


def generate_synthetic(spec: SyntheticSpec) -> list[Detection]:
    """Deterministic detections for ``spec``, with GT identities attached."""
    n, k, T = spec.n_objects, spec.k, spec.n_frames
    ids = spec.object_ids or tuple(range(1, n + 1))
    rng = np.random.default_rng(spec.seed)
    z = rng.standard_normal((T, n, k))
    # per-frame shuffle of detection ids so id order carries no identity hint
    perms = [rng.permutation(n) for _ in range(T)]
    scale = np.ones((n, k))
    for obj, dims in enumerate(spec.stable_dims):
        scale[obj, list(dims)] = spec.stable_scale
    gt = np.asarray(spec.gt_features, dtype=np.float64)
    w, h = spec.box_size
    dets = []
    for f in range(T):
        feats = np.maximum(gt + spec.sigma * scale * z[f], 0.0)
        for obj in range(n):
            cx = spec.starts[obj][0] + f * spec.velocities[obj][0]
            cy = spec.starts[obj][1] + f * spec.velocities[obj][1]
            det_id = f * n + int(perms[f][obj]) + 1
            dets.append(Detection(f + 1, det_id, (cx - w / 2, cy - h / 2, w, h),
                                  tuple(feats[obj]), gt_id=ids[obj]))
    dets.sort(key=lambda d: (d.frame, d.det_id))
    return dets


def crossing_scenario(seed: int, sigma: float = 0.0, *, n_objects: int = 3, n_frames: int = 12,
                      k: int = 24, n_stable: int = 6, stable_scale: float = 0.1,
                      speed: float = 20.0, base_range=(0.2, 0.6),
                      lift=(0.15, 0.35)) -> SyntheticSpec:
    """Objects on straight lines that all meet mid-sequence.

    Ground-truth features are drawn once per seed.  All objects share one
    base vector drawn from ``base_range``; each object then owns ``n_stable``
    disjoint stable dimensions, lifted by a draw from ``lift``, that see only
    ``stable_scale`` of the noise.  Identity therefore lives in a few
    dimensions while the rest look alike and carry full noise.
    """
    if n_objects * n_stable > k:
        raise ValueError("stable dimensions of different objects must not overlap")
    rng = np.random.default_rng([seed, 7])
    base = rng.uniform(base_range[0], base_range[1], size=k)
    gt = np.tile(base, (n_objects, 1))
    dims = rng.permutation(k)[:n_objects * n_stable].reshape(n_objects, n_stable)
    for obj in range(n_objects):
        gt[obj, dims[obj]] += rng.uniform(lift[0], lift[1], size=n_stable)
    angle0 = rng.uniform(0, 2 * np.pi)
    centre = np.array([320.0, 240.0])
    meet = (n_frames - 1) / 2.0
    starts, vels = [], []
    for obj in range(n_objects):
        a = angle0 + 2 * np.pi * obj / n_objects
        v = speed * np.array([np.cos(a), np.sin(a)])
        starts.append(tuple(float(x) for x in centre - meet * v))
        vels.append(tuple(float(x) for x in v))
    return SyntheticSpec(gt_features=tuple(tuple(float(x) for x in row) for row in gt.round(6)),
                         starts=tuple(starts), velocities=tuple(vels), n_frames=n_frames,
                         sigma=sigma, seed=seed,
                         stable_dims=tuple(tuple(sorted(int(x) for x in d)) for d in dims),
                         stable_scale=stable_scale)

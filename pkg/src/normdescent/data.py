"""Dataset ingestion: synthetic separable data and MNIST IDX parsing.

IDX files are the standard big-endian containers: magic 2051 + count + rows +
cols + unsigned pixel bytes for images, magic 2049 + count + label bytes for
labels. Gzipped files are detected and decompressed transparently.
"""

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IMAGES_MAGIC = 2051
LABELS_MAGIC = 2049

CACHE_VERSION = 1


class ParseError(ValueError):
    """IDX parse failure; message carries the byte offset."""


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # (m, d) float64
    labels: np.ndarray    # (m,) float64 in {-1, +1}
    provenance: str
    seed: int

    def __post_init__(self):
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("features/labels length mismatch")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("non-finite features")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be +-1")

    @property
    def m(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]


@dataclass(frozen=True)
class RawDigits:
    images: np.ndarray  # (n, rows, cols) float64 in [0, 1]
    digits: np.ndarray  # (n,) uint8 in 0..9


def synth_separable(m, d, margin_floor, seed):
    """Gaussian points labeled by a random unit teacher, with a margin floor.

    Points with |<w*, x>| < margin_floor are resampled, so every returned
    point satisfies y * <w*, x> >= margin_floor and the dataset is linearly
    separable by construction.
    """
    if m < 2 or d < 2:
        raise ValueError("need m >= 2 and d >= 2")
    if not 0 < margin_floor < 3:
        raise ValueError("margin_floor must lie in (0, 3); rejection explodes beyond")
    rng = np.random.default_rng(seed)
    teacher = rng.normal(size=d)
    teacher /= np.linalg.norm(teacher)
    rows = []
    while len(rows) < m:
        batch = rng.normal(size=(m, d))
        proj = batch @ teacher
        keep = np.abs(proj) >= margin_floor
        rows.extend(batch[keep])
    X = np.array(rows[:m])
    y = np.sign(X @ teacher)
    return Dataset(
        features=X,
        labels=y,
        provenance=f"synth_separable(m={m}, d={d}, margin_floor={margin_floor}, seed={seed})",
        seed=seed,
    )


def _open_maybe_gzip(path):
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head == b"\x1f\x8b":
        with gzip.open(path, "rb") as fh:
            return fh.read()
    return Path(path).read_bytes()


def _read_u32(buf, offset, what, path):
    if offset + 4 > len(buf):
        raise ParseError(f"{path}: truncated reading {what} at byte {offset}")
    return struct.unpack_from(">I", buf, offset)[0]


def parse_idx(images_path, labels_path):
    """Parse an IDX image/label file pair into RawDigits with pixels in [0, 1]."""
    img = _open_maybe_gzip(images_path)
    magic = _read_u32(img, 0, "magic", images_path)
    if magic != IMAGES_MAGIC:
        raise ParseError(f"{images_path}: wrong magic {magic} at byte 0, expected {IMAGES_MAGIC}")
    count = _read_u32(img, 4, "count", images_path)
    rows = _read_u32(img, 8, "rows", images_path)
    cols = _read_u32(img, 12, "cols", images_path)
    need = 16 + count * rows * cols
    if len(img) < need:
        raise ParseError(f"{images_path}: truncated pixel data at byte {len(img)}, need {need}")
    pixels = np.frombuffer(img, dtype=np.uint8, count=count * rows * cols, offset=16)
    images = pixels.reshape(count, rows, cols).astype(np.float64) / 255.0

    lab = _open_maybe_gzip(labels_path)
    magic = _read_u32(lab, 0, "magic", labels_path)
    if magic != LABELS_MAGIC:
        raise ParseError(f"{labels_path}: wrong magic {magic} at byte 0, expected {LABELS_MAGIC}")
    lcount = _read_u32(lab, 4, "count", labels_path)
    if lcount != count:
        raise ParseError(f"{labels_path}: label count {lcount} != image count {count}")
    if len(lab) < 8 + lcount:
        raise ParseError(f"{labels_path}: truncated label data at byte {len(lab)}")
    digits = np.frombuffer(lab, dtype=np.uint8, count=lcount, offset=8)
    if digits.size and digits.max() > 9:
        raise ParseError(f"{labels_path}: label byte {int(digits.max())} outside 0..9")
    return RawDigits(images=images, digits=digits.copy())


def write_idx(images, digits, images_path, labels_path):
    """Write RawDigits-style arrays as an IDX pair (testing fixture helper)."""
    images = np.asarray(images)
    digits = np.asarray(digits, dtype=np.uint8)
    n, rows, cols = images.shape
    pixel_bytes = np.clip(np.rint(images * 255.0), 0, 255).astype(np.uint8)
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGES_MAGIC, n, rows, cols))
        fh.write(pixel_bytes.tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", LABELS_MAGIC, n))
        fh.write(digits.tobytes())


def even_odd_subset(raw, m, seed):
    """Class-balanced even/odd subset: y = +1 for even digits, -1 for odd.

    Samples without replacement, deterministic per seed, balanced to within
    one example (the extra example goes to the even class when m is odd).
    Features are the flattened pixel rows, d = rows * cols.
    """
    if m > raw.digits.size:
        raise ValueError(f"requested {m} examples but only {raw.digits.size} available")
    even_idx = np.nonzero(raw.digits % 2 == 0)[0]
    odd_idx = np.nonzero(raw.digits % 2 == 1)[0]
    n_even = (m + 1) // 2
    n_odd = m // 2
    if n_even > even_idx.size or n_odd > odd_idx.size:
        raise ValueError(
            f"cannot balance: need {n_even} even / {n_odd} odd, "
            f"have {even_idx.size} / {odd_idx.size}"
        )
    rng = np.random.default_rng(seed)
    chosen = np.concatenate(
        [
            rng.choice(even_idx, size=n_even, replace=False),
            rng.choice(odd_idx, size=n_odd, replace=False),
        ]
    )
    rng.shuffle(chosen)
    X = raw.images[chosen].reshape(m, -1)
    y = np.where(raw.digits[chosen] % 2 == 0, 1.0, -1.0)
    return Dataset(
        features=X,
        labels=y,
        provenance=f"even_odd_subset(m={m}, seed={seed})",
        seed=seed,
    )


def cache_path(cache_dir, m, seed):
    return Path(cache_dir) / f"even_odd_m{m}_seed{seed}.npz"


def load_cached_subset(cache_dir, m, seed):
    """Return the cached Dataset or None (missing or stale cache version)."""
    path = cache_path(cache_dir, m, seed)
    if not path.exists():
        return None
    with np.load(path, allow_pickle=False) as blob:
        if int(blob["version"]) != CACHE_VERSION:
            return None
        return Dataset(
            features=blob["features"],
            labels=blob["labels"],
            provenance=str(blob["provenance"]),
            seed=int(blob["seed"]),
        )


def store_cached_subset(cache_dir, dataset, m, seed):
    path = cache_path(cache_dir, m, seed)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(
        path,
        version=CACHE_VERSION,
        features=dataset.features,
        labels=dataset.labels,
        provenance=dataset.provenance,
        seed=dataset.seed,
    )
    return path

"""AR-style sample naming, train/test split and a synthetic occluded dataset.

Files are named ``{gender}-{person}-{index}.{ext}``, e.g. ``m-001-01.pgm``.
Indices 1-7 and 14-20 are unobstructed training shots, 8-13 and 21-26
the test shots. Only the file stem is parsed, so any extension works.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import FilenameError, InvalidInputError
from .imageio import read_image, write_pgm

log = logging.getLogger(__name__)

TRAIN_IDS = tuple(range(1, 8)) + tuple(range(14, 21))
TEST_IDS = tuple(range(8, 14)) + tuple(range(21, 27))
GENDERS = ("m", "w")

#: Share of every class basis image taken from the common background.
BACKGROUND_WEIGHT = 0.9


class Sample(NamedTuple):
    image: np.ndarray
    label: str
    name: str = ""


@dataclass(frozen=True)
class SampleMeta:
    gender: str
    person: int
    img_idx: int
    name: str = ""

    @property
    def label(self):
        return f"{self.gender}-{self.person:03d}"

    @property
    def is_train(self):
        return self.img_idx in TRAIN_IDS


def parse_filename(name):
    """Parse an AR-convention file name.

    >>> parse_filename("m-001-01.pgm").label
    'm-001'
    """
    stem = Path(name).name.split(".", 1)[0]
    parts = stem.split("-")
    if len(parts) != 3:
        raise FilenameError(name, "layout", f"expected gender-person-index, got {len(parts)} fields")
    gender, person, idx = parts
    if gender not in GENDERS:
        raise FilenameError(name, "gender", f"{gender!r} is not one of {GENDERS}")
    if not person.isdigit() or int(person) < 1:
        raise FilenameError(name, "person", f"{person!r} is not a positive integer")
    if not idx.isdigit() or not 1 <= int(idx) <= 26:
        raise FilenameError(name, "image index", f"{idx!r} is not an integer in 1..26")
    return SampleMeta(gender, int(person), int(idx), stem)


def split(samples):
    """Partition samples into (train, test) by image index, each sorted by (label, index)."""
    ordered = sorted(samples, key=lambda s: (s.label, s.img_idx))
    train = [s for s in ordered if s.img_idx in TRAIN_IDS]
    test = [s for s in ordered if s.img_idx not in TRAIN_IDS]
    return train, test


def scan_directory(directory):
    """Find every parseable sample file below `directory`.

    Returns ``(meta, path)`` pairs; files whose names do not parse are
    skipped with a warning.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise InvalidInputError(f"{directory} is not a directory")
    found = []
    for path in sorted(p for p in directory.rglob("*") if p.is_file()):
        try:
            found.append((parse_filename(path.name), path))
        except FilenameError as exc:
            log.warning("skipping %s", exc)
    return found


def load_split(directory):
    """Load a directory and return (train, test) lists of :class:`Sample`."""
    entries = scan_directory(directory)
    paths = {meta: path for meta, path in entries}
    train, test = split(paths)
    return ([Sample(read_image(paths[m]), m.label, m.name) for m in train],
            [Sample(read_image(paths[m]), m.label, m.name) for m in test])


@dataclass(frozen=True)
class SynthConfig:
    n_classes: int = 10
    n_train_per_class: int = 14
    n_test_per_class: int = 12
    width: int = 55
    height: int = 66
    subspace_dim: int = 3
    noise_sigma: float = 0.05
    occlusion_fraction: float = 0.3
    occlusion_value: float = 1.0
    seed: int = 42

    def validate(self):
        if self.n_classes < 1:
            raise InvalidInputError("n_classes must be >= 1")
        if not 1 <= self.n_train_per_class <= len(TRAIN_IDS):
            raise InvalidInputError(f"n_train_per_class must be in 1..{len(TRAIN_IDS)}")
        if not 0 <= self.n_test_per_class <= len(TEST_IDS):
            raise InvalidInputError(f"n_test_per_class must be in 0..{len(TEST_IDS)}")
        if self.width < 1 or self.height < 1:
            raise InvalidInputError("image dimensions must be positive")
        if not 1 <= self.subspace_dim <= self.width * self.height:
            raise InvalidInputError("subspace_dim must be in 1..width*height")
        if not self.noise_sigma >= 0:
            raise InvalidInputError("noise_sigma must be >= 0")
        if not 0 <= self.occlusion_fraction < 1:
            raise InvalidInputError("occlusion_fraction must be in [0, 1)")
        if not 0 <= self.seed < 2**64:
            raise InvalidInputError("seed must be an unsigned 64-bit integer")


def synthetic_label(c, n_classes):
    """Class `c` (0-based) as an AR label: first half male, rest female."""
    n_male = (n_classes + 1) // 2
    if c < n_male:
        return f"m-{c + 1:03d}"
    return f"w-{c - n_male + 1:03d}"


def occlude(image, fraction, value):
    """Overwrite the bottom ``round(fraction * height)`` rows with `value`."""
    out = np.array(image, dtype=np.float64)
    band = int(round(fraction * out.shape[0]))
    if band:
        out[out.shape[0] - band:, :] = value
    return out


def generate_synthetic(cfg):
    """Seeded stand-in for a masked-face dataset.

    Random numbers come from numpy's PCG64 bit generator seeded with
    ``cfg.seed`` and are drawn in this fixed order:

    1. a shared background image, ``random((height, width))``;
    2. per class, ``subspace_dim`` basis images, each a blend of the
       background (weight ``BACKGROUND_WEIGHT``) and ``random((height, width))``;
    3. per class, each training image then each test image: convex weights
       ``dirichlet(ones(subspace_dim))`` and a noise field
       ``standard_normal((height, width))``.

    An image is ``clip(weights @ basis + noise_sigma * noise, 0, 1)``.
    Test images additionally get their bottom rows overwritten by
    :func:`occlude`, which draws nothing, so the occlusion settings never
    shift the random stream.

    Returns
    -------
    train, test : list of Sample
    """
    cfg.validate()
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    shape = (cfg.height, cfg.width)
    background = rng.random(shape)
    train, test = [], []
    for c in range(cfg.n_classes):
        label = synthetic_label(c, cfg.n_classes)
        basis = (BACKGROUND_WEIGHT * background
                 + (1 - BACKGROUND_WEIGHT) * rng.random((cfg.subspace_dim,) + shape))

        def render():
            w = rng.dirichlet(np.ones(cfg.subspace_dim))
            noise = rng.standard_normal(shape)
            return np.clip(np.tensordot(w, basis, axes=1) + cfg.noise_sigma * noise, 0.0, 1.0)

        for idx in TRAIN_IDS[:cfg.n_train_per_class]:
            train.append(Sample(render(), label, f"{label}-{idx:02d}"))
        for idx in TEST_IDS[:cfg.n_test_per_class]:
            img = occlude(render(), cfg.occlusion_fraction, cfg.occlusion_value)
            test.append(Sample(img, label, f"{label}-{idx:02d}"))
    return train, test


def write_dataset(train, test, out_dir):
    """Write samples as 8-bit PGMs under ``out_dir/train`` and ``out_dir/test``."""
    out_dir = Path(out_dir)
    for sub, samples in (("train", train), ("test", test)):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)
        for s in samples:
            write_pgm(out_dir / sub / f"{s.name}.pgm", s.image)

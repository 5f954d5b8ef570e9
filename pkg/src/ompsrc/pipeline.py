"""Grid-partitioned sparse-representation image classifier.

Every image is resized to a fixed raster, cut into an ``x_n`` by ``y_n``
grid of patches and each patch is l2-normalized. Training patches become
the columns of one dictionary per grid cell. A test image is classified
patch by patch (sparse code, then class residuals) and the patch labels
are combined by majority vote.

Rasters are (height, width) arrays. Patch ``i * y_n + j`` covers columns
``[i*grid_w, (i+1)*grid_w)`` and rows ``[j*grid_h, (j+1)*grid_h)`` and is
flattened row-major. Pixels past the last full patch are dropped.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InvalidInputError
from .linalg import normalize_l2
from .omp import ExactSparsity, omp_solve
from .src import build_class_masks, classify_patch


@dataclass(frozen=True)
class GridSpec:
    width: int = 55
    height: int = 66
    x_n: int = 11
    y_n: int = 11

    def __post_init__(self):
        for name in ("width", "height", "x_n", "y_n"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise InvalidInputError(f"{name} must be a positive integer, got {value!r}")
        if self.width // self.x_n < 1 or self.height // self.y_n < 1:
            raise InvalidInputError(
                f"grid {self.x_n}x{self.y_n} is finer than the {self.width}x{self.height} raster")

    @property
    def grid_w(self):
        return self.width // self.x_n

    @property
    def grid_h(self):
        return self.height // self.y_n

    @property
    def patch_dim(self):
        return self.grid_w * self.grid_h

    @property
    def n_patches(self):
        return self.x_n * self.y_n


@dataclass
class Dictionary:
    grid: GridSpec
    per_patch: list
    column_labels: list
    masks: list = field(default=None)

    def __post_init__(self):
        if self.masks is None:
            self.masks = build_class_masks(self.column_labels, len(self.column_labels))

    @property
    def n_train(self):
        return len(self.column_labels)

    @property
    def labels(self):
        return [m.label for m in self.masks]


@dataclass
class ImagePrediction:
    true_label: object
    predicted: str
    votes: dict
    per_patch: list
    residual_totals: dict
    name: str = ""

    @property
    def correct(self):
        return self.true_label == self.predicted

    @property
    def vote_margin(self):
        counts = sorted(self.votes.values(), reverse=True) + [0]
        return counts[0] - counts[1]


@dataclass
class EvaluationReport:
    per_class_accuracy: dict
    global_accuracy: float
    n_images: int
    predictions: list


def downsample(image, width, height):
    """Bilinear resize of a (rows, cols) raster to (height, width).

    Output pixel centres are mapped onto the source with half-pixel
    alignment and source coordinates are clamped at the borders, so every
    output value is a convex combination of at most four source pixels.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise InvalidInputError(f"expected a non-empty 2-D raster, got shape {img.shape}")
    if width < 1 or height < 1:
        raise InvalidInputError(f"target size must be positive, got {width}x{height}")
    i0, i1, fy = _linear_taps(img.shape[0], height)
    rows = img[i0] * (1 - fy)[:, None] + img[i1] * fy[:, None]
    j0, j1, fx = _linear_taps(img.shape[1], width)
    return rows[:, j0] * (1 - fx) + rows[:, j1] * fx


def _linear_taps(n_in, n_out):
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    lo = np.floor(src).astype(int)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, src - lo


def partition_grid(image, grid):
    """Cut a (height, width) raster into ``grid.n_patches`` flattened patches."""
    img = np.asarray(image, dtype=np.float64)
    if img.shape != (grid.height, grid.width):
        raise DimensionError(
            f"image has shape {img.shape}, grid expects ({grid.height}, {grid.width})")
    gw, gh = grid.grid_w, grid.grid_h
    patches = []
    for i in range(grid.x_n):
        for j in range(grid.y_n):
            patches.append(img[gh * j:gh * (j + 1), gw * i:gw * (i + 1)].reshape(-1).copy())
    return patches


def image_patches(image, grid):
    """Resize, partition and normalize; returns an (n_patches, patch_dim) array."""
    small = downsample(image, grid.width, grid.height)
    return np.stack([normalize_l2(p) for p in partition_grid(small, grid)])


def build_dictionary(training, grid):
    """Stack normalized training patches into one dictionary per grid cell.

    `training` holds ``(image, label)`` pairs (extra tuple fields are
    ignored). Column ``j`` of every patch matrix comes from training image
    ``j``.
    """
    training = list(training)
    if not training:
        raise InvalidInputError("no training samples")
    stacks = np.stack([image_patches(item[0], grid) for item in training], axis=2)
    per_patch = [np.ascontiguousarray(stacks[k]) for k in range(grid.n_patches)]
    labels = [str(item[1]) for item in training]
    return Dictionary(grid, per_patch, labels)


def default_rule(grid):
    """Run for the full patch dimension."""
    return ExactSparsity(grid.patch_dim)


def classify_image(dictionary, image, rule=None, true_label=None, name=""):
    """Classify every patch of `image` and take the majority vote.

    A tied vote goes to the label with the smallest residual summed over
    all patches, then to the smallest label.
    """
    if dictionary.n_train < 1:
        raise InvalidInputError("dictionary is empty")
    grid = dictionary.grid
    rule = default_rule(grid) if rule is None else rule
    patches = image_patches(image, grid)
    votes = {}
    totals = dict.fromkeys(dictionary.labels, 0.0)
    per_patch = []
    for k, y in enumerate(patches):
        A = dictionary.per_patch[k]
        table = classify_patch(A, omp_solve(A, y, rule), y, dictionary.masks)
        per_patch.append((k, table.predicted))
        votes[table.predicted] = votes.get(table.predicted, 0) + 1
        for label, res in table.entries.items():
            totals[label] += res
    predicted = min(votes, key=lambda lab: (-votes[lab], totals[lab], lab))
    return ImagePrediction(true_label, predicted, dict(sorted(votes.items())),
                           per_patch, totals, name)


def evaluate(dictionary, test, rule=None, workers=1):
    """Classify every test image and tabulate accuracy.

    `test` holds ``(image, label)`` or ``(image, label, name)`` tuples.
    With ``workers > 1`` images are classified on a thread pool; results
    keep the input order either way.
    """
    test = list(test)
    if not test:
        raise InvalidInputError("no test samples")

    def run(indexed):
        idx, item = indexed
        name = item[2] if len(item) > 2 else str(idx)
        return classify_image(dictionary, item[0], rule, str(item[1]), name)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            predictions = list(pool.map(run, enumerate(test)))
    else:
        predictions = [run(x) for x in enumerate(test)]

    seen, right = {}, {}
    for pred in predictions:
        seen[pred.true_label] = seen.get(pred.true_label, 0) + 1
        right[pred.true_label] = right.get(pred.true_label, 0) + pred.correct
    per_class = {lab: right[lab] / seen[lab] for lab in sorted(seen)}
    total = sum(right.values())
    return EvaluationReport(per_class, total / len(predictions), len(predictions), predictions)

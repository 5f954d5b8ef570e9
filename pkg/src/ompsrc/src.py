"""Sparse representation-based classification.

A sparse code over a dictionary whose columns carry class labels is
scored class by class: keep only the coefficients of one class, measure
how well they alone reconstruct the signal, and predict the class with
the smallest reconstruction residual.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidInputError
from .linalg import as_matrix, as_vector


@dataclass(frozen=True)
class ClassMask:
    label: str
    indicator: np.ndarray


@dataclass
class ClassResidualTable:
    entries: dict
    predicted: str


def build_class_masks(column_labels, p):
    """One 0/1 indicator of length `p` per distinct label, sorted by label.

    Column ``j`` belongs to ``column_labels[j]``; columns at or beyond
    ``len(column_labels)`` belong to no class.

    >>> [(m.label, m.indicator.tolist()) for m in build_class_masks(["A", "A", "B"], 3)]
    [('A', [1.0, 1.0, 0.0]), ('B', [0.0, 0.0, 1.0])]
    """
    labels = list(column_labels)
    if not labels:
        raise InvalidInputError("column_labels is empty")
    if len(labels) > p:
        raise DimensionError(f"{len(labels)} labels for only {p} columns")
    labels_arr = np.array(labels, dtype=object)
    masks = []
    for label in sorted(set(labels)):
        indicator = np.zeros(p)
        indicator[:len(labels)] = (labels_arr == label)
        masks.append(ClassMask(label, indicator))
    return masks


def class_residuals(A, coeffs, y, indicators):
    """Residual norms ``||y - A @ (coeffs * indicators[:, i])||`` for every column i.

    Only the atoms in the support of `coeffs` contribute, so the products
    are formed over those columns alone.
    """
    nz = np.flatnonzero(coeffs)
    recon = (A[:, nz] * coeffs[nz]) @ indicators[nz, :]
    return np.linalg.norm(y[:, None] - recon, axis=0)


def classify_patch(A, code, y, masks):
    """Assign `y` to the class whose atoms best reconstruct it.

    Parameters
    ----------
    A : array_like, shape (m, p)
    code : SparseCode
        Sparse code of `y` over `A`; only ``code.coeffs`` is used.
    y : array_like, shape (m,)
    masks : list of ClassMask

    Returns
    -------
    ClassResidualTable
        Residual per label; ties on the minimum go to the smallest label.
    """
    A = as_matrix(A, "A")
    y = as_vector(y, "y")
    coeffs = as_vector(code.coeffs, "coeffs")
    m, p = A.shape
    if coeffs.shape[0] != p:
        raise DimensionError(f"code has {coeffs.shape[0]} coefficients, dictionary has {p} columns")
    if y.shape[0] != m:
        raise DimensionError(f"A has {m} rows but y has length {y.shape[0]}")
    if not masks:
        raise InvalidInputError("no class masks given")
    for mask in masks:
        if mask.indicator.shape != (p,):
            raise DimensionError(f"mask {mask.label!r} has shape {mask.indicator.shape}, expected ({p},)")

    order = sorted(range(len(masks)), key=lambda i: masks[i].label)
    labels = [masks[i].label for i in order]
    indicators = np.stack([masks[i].indicator for i in order], axis=1)
    res = class_residuals(A, coeffs, y, indicators)
    best = int(np.argmin(res))
    return ClassResidualTable(dict(zip(labels, res.tolist())), labels[best])

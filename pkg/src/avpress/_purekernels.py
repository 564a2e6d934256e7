"""Pure numpy implementations of the hot kernels.

Mirror of the compiled ``avpress._native`` module; both backends expose the
same four functions with identical contracts. Selection happens in
:mod:`avpress.kernels`. All inputs are float64 C-contiguous arrays; index
arrays are int64 and zero-based.
"""

import numpy as np


def frame_mean(tokens):
    """Mean token per frame: (T, P, d) -> (T, d)."""
    return tokens.mean(axis=1)


def cosine_rows(mat, vec):
    """Cosine of each row of ``mat`` against ``vec``; zero-norm rows score 0."""
    vec_norm = float(np.linalg.norm(vec))
    out = np.zeros(mat.shape[0], dtype=np.float64)
    if vec_norm == 0.0:
        return out
    row_norms = np.linalg.norm(mat, axis=1)
    nonzero = row_norms > 0.0
    out[nonzero] = (mat[nonzero] @ vec) / (row_norms[nonzero] * vec_norm)
    return out


def weighted_rows_sum(mat, weights):
    """Weighted sum of rows: (n, d), (n,) -> (d,)."""
    return weights @ mat


def merge_into_anchors(tokens, anchor_rows, assign):
    """Fold dropped tokens into their anchors by relu-cosine weighting.

    tokens: (N, d) all audio token features.
    anchor_rows: (B,) row index of each anchor, ascending.
    assign: (N,) anchor-list index each dropped token folds into, -1 for
        rows that are anchors themselves or discarded.

    Returns (B, d) merged anchor features: for anchor j with group G,
    (a_j + sum_i w_i a_i) / (1 + sum_i w_i), w_i = max(0, cos(a_i, a_j)).
    """
    merged = tokens[anchor_rows].copy()
    denom = np.ones(len(anchor_rows), dtype=np.float64)
    for j, row in enumerate(anchor_rows):
        group = np.nonzero(assign == j)[0]
        if group.size == 0:
            continue
        weights = np.maximum(cosine_rows(tokens[group], tokens[row]), 0.0)
        merged[j] += weights @ tokens[group]
        denom[j] += weights.sum()
    return merged / denom[:, None]

"""Dataset ingestion and synthetic data generation."""

from pathlib import Path

import numpy as np

from ..encoding import Dataset
from ..errors import NonBinaryLabels, ParseError


def load_csv(path, label_column: int = -1, label_mapping: dict | None = None,
             skip_header: bool | None = None) -> Dataset:
    """Rectangular numeric CSV (comma or whitespace separated) with a binary
    label column. Row order is preserved; labels map to {-1, +1}.

    `label_mapping` maps raw label strings to -1/+1; without it the column
    must already contain exactly two numeric values from {-1, +1} or {0, 1}.
    """
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty file")
    delim = "," if "," in lines[0] else None  # None: any whitespace
    rows = []
    for ln in lines:
        rows.append(ln.split(",") if delim else ln.split())
    if skip_header is None:
        # a header is any first row whose non-label cells fail to parse
        skip_header = False
        for cell in rows[0]:
            try:
                float(cell)
            except ValueError:
                if label_mapping and cell.strip() in label_mapping:
                    continue
                skip_header = True
                break
    if skip_header:
        rows = rows[1:]
    if not rows:
        raise ParseError("no data rows")
    width = len(rows[0])
    label_idx = label_column % width
    features = []
    labels = []
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"ragged row of width {len(row)}, expected {width}",
                             row=r, column=len(row))
        feat = []
        for c, cell in enumerate(row):
            cell = cell.strip()
            if c == label_idx:
                if label_mapping is not None:
                    if cell not in label_mapping:
                        raise ParseError(f"unmapped label {cell!r}", row=r, column=c)
                    labels.append(label_mapping[cell])
                else:
                    try:
                        labels.append(float(cell))
                    except ValueError as exc:
                        raise ParseError(f"bad label {cell!r}", row=r, column=c) from exc
            else:
                try:
                    feat.append(float(cell))
                except ValueError as exc:
                    raise ParseError(f"bad value {cell!r}", row=r, column=c) from exc
        features.append(feat)
    y = np.asarray(labels)
    values = sorted(set(y.tolist()))
    if values == [0.0, 1.0]:
        y = np.where(y == 1.0, 1, -1)
    elif set(values) <= {-1.0, 1.0}:
        y = y.astype(np.int64)
    else:
        raise NonBinaryLabels(f"label column holds {values}")
    return Dataset(np.asarray(features, dtype=np.float64), y.astype(np.int8))


# Frozen synthetic-generator geometry (see gen_synthetic). A Gaussian core
# (class +1) sits inside a jittered uniform shell (class -1) in a latent
# 3-space; a random linear mix embeds the structure into the k observed,
# correlated coordinates. Calibrated so that 75-stump boosting lands near 90,
# 200-RLC boosting within a few points of it, and no linear classifier beats
# ~62%. Full-rank variants were measured to open a >= 12-point stump/RLC gap
# regardless of shell placement, which no parameter choice could close.
_LATENT_DIM = 3
_SHELL_INNER = 2.7
_SHELL_OUTER = 4.3
_SHELL_JITTER = 0.25
_OBS_NOISE = 0.3


def gen_synthetic(n: int, k: int, seed: int) -> Dataset:
    """Radially separated classes embedded in correlated coordinates:
    +1 is a Gaussian core at the origin, -1 a jittered uniform shell around
    it. Balanced, not linearly separable."""
    if n < 10 or k < 2:
        raise ValueError("need n >= 10 and k >= 2")
    rng = np.random.default_rng(seed)
    m = min(_LATENT_DIM, k)
    n_pos = n // 2
    n_neg = n - n_pos
    core = rng.normal(0.0, 1.0, size=(n_pos, m))
    dirs = rng.normal(size=(n_neg, m))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = rng.uniform(_SHELL_INNER, _SHELL_OUTER, size=n_neg)
    shell = dirs * radii[:, None] + rng.normal(0.0, _SHELL_JITTER, size=(n_neg, m))
    latent = np.vstack([core, shell])
    mix = rng.normal(size=(m, k))
    X = latent @ mix + rng.normal(0.0, _OBS_NOISE, size=(n, k))
    y = np.concatenate([np.ones(n_pos, dtype=np.int8),
                        -np.ones(n_neg, dtype=np.int8)])
    perm = rng.permutation(n)
    return Dataset(X[perm], y[perm])

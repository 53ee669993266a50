"""Input validation helpers shared by the public entry points."""

from __future__ import annotations

import numpy as np


def check_transition_matrix(M) -> np.ndarray:
    """Return ``M`` as a square 0/1 ``uint8`` array, raising ValueError otherwise.

    Accepts a :class:`~treeck.alphabet.TransitionMatrix`, a nested sequence
    or an ndarray.
    """
    bits = getattr(M, "bits", M)
    arr = np.asarray(bits)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"transition matrix must be square, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError("transition matrix must be nonempty")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("transition matrix entries must be 0 or 1")
    return arr.astype(np.uint8, copy=False)


def check_int_matrix(A) -> list:
    """Return ``A`` as a rectangular list of lists of Python ints."""
    if isinstance(A, np.ndarray):
        if A.ndim != 2:
            raise ValueError(f"expected a 2-d matrix, got {A.ndim} dimensions")
        rows = A.tolist()
    else:
        rows = [list(r) for r in A]
    if rows:
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("matrix rows have different lengths")
    out = []
    for r in rows:
        row = []
        for x in r:
            if isinstance(x, (bool, np.bool_)) or not isinstance(x, (int, np.integer)):
                if isinstance(x, (float, np.floating)) and float(x).is_integer():
                    x = int(x)
                else:
                    raise ValueError(f"matrix entries must be integers, got {x!r}")
            row.append(int(x))
        out.append(row)
    return out


def check_letter_vectors(X, n_letters: int) -> list:
    """Validate a 2-d array of integer letter vectors with ``n_letters`` columns."""
    rows = check_int_matrix(X)
    for r in rows:
        if len(r) != n_letters:
            raise ValueError(f"expected {n_letters} columns, got {len(r)}")
    return rows

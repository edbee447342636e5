"""Dense symmetric linear algebra and Mahalanobis geometry.

All routines work on plain ``numpy`` arrays: vectors are 1-d arrays of
length ``p``, samples are ``(n, p)`` arrays with observations in rows,
and scatter matrices are ``(p, p)`` symmetric positive definite (SPD)
arrays.  SPD-ness is validated on entry and violations raise
:class:`~ellipsym.errors.NotSPD` rather than producing garbage distances.
"""

from __future__ import annotations

import numpy as np

from .errors import NotSPD

# Relative tolerances for the SPD check: symmetry and smallest eigenvalue.
SYM_REL_TOL = 1e-12
EIG_REL_TOL = 1e-12


def _spd_eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecompose ``m`` after validating symmetry and positivity."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSPD(f"expected a square matrix, got shape {m.shape}")
    scale = np.abs(m).max()
    if not np.isfinite(scale):
        raise NotSPD("matrix has non-finite entries")
    if scale > 0 and np.abs(m - m.T).max() > SYM_REL_TOL * scale:
        raise NotSPD("matrix is not symmetric to within tolerance")
    w, q = np.linalg.eigh(m)
    tr = float(np.trace(m))
    if w[0] <= EIG_REL_TOL * tr:
        raise NotSPD(
            f"smallest eigenvalue {w[0]:.3e} below SPD tolerance "
            f"{EIG_REL_TOL * tr:.3e}"
        )
    return w, q


def check_spd(m: np.ndarray) -> np.ndarray:
    """Validate that ``m`` is SPD and return it as a float array.

    Raises
    ------
    NotSPD
        If ``m`` is not symmetric to ``1e-12`` relative, or its smallest
        eigenvalue is ``<= 1e-12 * trace(m)``.
    """
    _spd_eigh(m)
    return np.asarray(m, dtype=float)


def sym_sqrt(m: np.ndarray) -> np.ndarray:
    """Symmetric square root ``A`` with ``A @ A = m``."""
    w, q = _spd_eigh(m)
    a = (q * np.sqrt(w)) @ q.T
    return (a + a.T) / 2.0


def sym_inv_sqrt(m: np.ndarray) -> np.ndarray:
    """Symmetric inverse square root of an SPD matrix.

    Returns the unique SPD matrix ``A`` with ``A @ m @ A = I``, computed
    from the full symmetric eigendecomposition (the symmetric root is
    unique, so there is no sign/rotation ambiguity).
    """
    w, q = _spd_eigh(m)
    a = (q / np.sqrt(w)) @ q.T
    return (a + a.T) / 2.0


def mahalanobis_sq(x: np.ndarray, v: np.ndarray, s: np.ndarray) -> float:
    """Squared Mahalanobis distance ``(x - v)' s^{-1} (x - v)``.

    Nonnegative by construction; dimensions of ``x``, ``v`` and ``s``
    must agree.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape != v.shape or x.ndim != 1:
        raise ValueError(f"dimension mismatch: x {x.shape}, v {v.shape}")
    w, q = _spd_eigh(s)
    if s.shape[0] != x.shape[0]:
        raise ValueError(f"dimension mismatch: x {x.shape}, s {s.shape}")
    y = q.T @ (x - v)
    return float(np.sum(y * y / w))


def mahalanobis_sq_many(sample: np.ndarray, v: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Squared Mahalanobis distances of every row of ``sample`` to ``v``."""
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    w, q = _spd_eigh(s)
    y = (sample - v) @ q
    return np.maximum(np.einsum("ij,ij->i", y / w, y), 0.0)


def pairwise_distances(
    sample: np.ndarray, mu: np.ndarray, v: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Difference and sum Mahalanobis distance matrices of a sample.

    With ``z_i = v^{-1/2} (x_i - mu)``, returns the pair ``(dminus,
    dplus)`` of ``(n, n)`` matrices

    * ``dminus[i, j] = ||z_i - z_j||``  (distance of the difference),
    * ``dplus[i, j]  = ||z_i + z_j||``  (distance of the sum of the
      centered vectors).

    Both are symmetric; ``dminus`` has an exactly zero diagonal and
    ``dplus[j, j] = 2 ||z_j||``.
    """
    sample = np.asarray(sample, dtype=float)
    if sample.ndim != 2 or sample.shape[0] < 2:
        raise ValueError("sample must be an (n, p) array with n >= 2")
    a = sym_inv_sqrt(v)
    z = (sample - np.asarray(mu, dtype=float)) @ a
    g = z @ z.T
    g = (g + g.T) / 2.0
    r = np.diag(g).copy()
    dminus_sq = r[:, None] + r[None, :] - 2.0 * g
    dplus_sq = r[:, None] + r[None, :] + 2.0 * g
    np.fill_diagonal(dminus_sq, 0.0)
    dminus = np.sqrt(np.maximum(dminus_sq, 0.0))
    dplus = np.sqrt(np.maximum(dplus_sq, 0.0))
    return dminus, dplus

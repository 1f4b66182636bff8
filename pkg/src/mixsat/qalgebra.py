"""Dense complex linear algebra on 2- and 4-dimensional spaces.

Conventions fixed here and used everywhere else:

* A two-qubit ray ``phi`` over sites (i, j) stores amplitudes in the
  order ``|b_i b_j>`` with ``b_i`` the major index, i.e. amplitude k
  belongs to ``b_i = k >> 1``, ``b_j = k & 1``.
* ``clause_matrix(phi)`` is the row-major reshape R with
  ``R[b_i, b_j] = phi[2*b_i + b_j]``.
* ``transfer_matrix(phi)`` maps a state psi on site j to a state on
  site i annihilating the clause: ``T = EPS @ conj(R)``. The identity
  ``A^T EPS A = det(A) EPS`` together with ``psi^T EPS psi = 0`` makes
  ``<phi| (T psi) x psi > = 0`` hold for *every* psi, which is what the
  snip replay and the product-state solver lean on.
* Rays are stored normalized with canonical phase: the first amplitude
  of magnitude > 1e-12 is real and positive. ``canonical_ray`` is
  bit-stable under re-application so serialized rays round-trip exactly.
"""

from __future__ import annotations

import numpy as np

EPS = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)

NORM_TOL = 1e-12
RANK_TOL = 1e-9


def _ray_norm(v: np.ndarray) -> float:
    # shared formula: keeps scalar and vectorized canonicalization
    # bit-identical (axis-wise linalg.norm rounds differently)
    return float(np.sqrt(np.sum(v.real**2 + v.imag**2)))


def canonical_ray(vec, tol: float = NORM_TOL) -> np.ndarray:
    """Return the canonical representative of the ray through ``vec``.

    Normalizes (skipped when the norm is already within 1e-12 of one)
    and rotates the global phase so the pivot amplitude is real and
    positive. Idempotent at the bit level.
    """
    v = np.asarray(vec, dtype=complex)
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite amplitudes")
    n = _ray_norm(v)
    if n < tol:
        raise ValueError("zero vector has no ray representative")
    if abs(n - 1.0) > tol:
        v = v / n
    else:
        v = v.copy()
    k = int(np.argmax(np.abs(v) > tol))
    a = v[k]
    if not (a.imag == 0.0 and a.real > 0.0):
        v *= a.conjugate() / abs(a)
        v[k] = abs(a)
    return v


def canonical_rays(rows: np.ndarray) -> np.ndarray:
    """Vectorized ``canonical_ray`` over the rows of a 2-D array.

    Bit-identical to mapping the scalar routine over rows (same
    normalize-only-when-needed and rotate-only-when-needed branches).
    """
    v = np.array(rows, dtype=complex)
    if v.shape[0] == 0:
        return v
    norms = np.sqrt(np.sum(v.real**2 + v.imag**2, axis=1))
    if np.any(norms < NORM_TOL):
        raise ValueError("zero row in ray batch")
    need = np.abs(norms - 1.0) > NORM_TOL
    if np.any(need):
        v[need] = v[need] / norms[need, None]
    idx = np.arange(v.shape[0])
    k = np.argmax(np.abs(v) > NORM_TOL, axis=1)
    a = v[idx, k]
    rotate = ~((a.imag == 0.0) & (a.real > 0.0))
    if np.any(rotate):
        rows_r = idx[rotate]
        a_r = a[rotate]
        v[rows_r] *= (a_r.conjugate() / np.abs(a_r))[:, None]
        v[rows_r, k[rotate]] = np.abs(a_r)
    return v


def haar_ray(dim: int, rng) -> np.ndarray:
    """Haar-uniform ray on C^dim for dim in {2, 4}.

    Standard complex Gaussian components (interleaved re/im lanes),
    normalized and phase-canonicalized. The all-zero draw is measure
    zero; it is skipped by redrawing.
    """
    if dim not in (2, 4):
        raise ValueError("dim must be 2 or 4")
    while True:
        z = np.asarray(rng.standard_normal(2 * dim))
        v = z[0::2] + 1j * z[1::2]
        if np.linalg.norm(v) >= NORM_TOL:
            # one-row batch: bit-identical to vectorized ensemble draws
            return canonical_rays(v[None, :])[0]


def clause_matrix(phi) -> np.ndarray:
    """2x2 reshape R with R[b_i, b_j] = phi[2*b_i + b_j]."""
    return np.asarray(phi, dtype=complex).reshape(2, 2)


def transfer_matrix(phi) -> np.ndarray:
    """Map a site-j state to an annihilating site-i state: EPS @ conj(R).

    Equals eps . phi^dagger in the (j, i)-indexed matrix convention
    R_ji = R.T. Rank 1 exactly when phi is a product ray (classical
    clauses included); then ``T psi = 0`` iff psi kills the clause on
    its own and the attached site is unconstrained.
    """
    return EPS @ clause_matrix(phi).conj()


def clause_inner(phi, x_i, y_j) -> complex:
    """Residual amplitude <phi| x_i (x) y_j > in the |b_i b_j> order."""
    return complex(np.asarray(x_i) @ clause_matrix(phi).conj() @ np.asarray(y_j))


def nullspace(mat, tol: float | None = None):
    """Orthonormal kernel basis of a complex matrix.

    Returns ``(basis, dim)`` where basis columns span the kernel at the
    given relative tolerance (default 1e-9 of the largest singular
    value), ordered by ascending singular value (exact zeros first).
    """
    a = np.atleast_2d(np.asarray(mat, dtype=complex))
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite matrix entries")
    if tol is None:
        tol = RANK_TOL
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0.0 else 0
    basis = vh[rank:][::-1].conj().T
    return basis, basis.shape[1]


def _is_scalar_multiple_of_identity(m: np.ndarray, tol: float) -> bool:
    scale = max(1.0, float(np.max(np.abs(m))))
    mean_diag = (m[0, 0] + m[1, 1]) / 2.0
    return bool(np.max(np.abs(m - mean_diag * np.eye(2))) <= tol * scale)


def common_eigenvector(mats, tol: float = RANK_TOL):
    """A ray that every 2x2 matrix maps to a multiple of itself, or None.

    Candidates come from the eigenvectors of the first matrix that is
    not a scalar multiple of the identity; each candidate is checked
    against the whole list at relative tolerance ``tol``. A single
    matrix always yields one of its eigenvectors.
    """
    mats = [np.asarray(m, dtype=complex).reshape(2, 2) for m in mats]
    if not mats:
        raise ValueError("need at least one matrix")
    candidates = None
    for m in mats:
        if not _is_scalar_multiple_of_identity(m, tol):
            _, vecs = np.linalg.eig(m)
            candidates = [vecs[:, 0], vecs[:, 1]]
            break
    if candidates is None:
        return canonical_ray(np.array([1.0, 0.0], dtype=complex))
    for cand in candidates:
        v = canonical_ray(cand)
        ok = True
        for m in mats:
            lam = np.vdot(v, m @ v)
            if np.linalg.norm(m @ v - lam * v) > tol * (1.0 + np.max(np.abs(m))):
                ok = False
                break
        if ok:
            return v
    return None

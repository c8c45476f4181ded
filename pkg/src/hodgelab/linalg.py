"""Numerical kernel: sparse symmetric solves, smallest generalized eigenpairs,
finite-field ranks and Gram orthonormalization.

All entry points are pure functions over immutable inputs.  Randomized starts
are seeded, so repeated calls with identical arguments return bit-identical
results.
"""

from __future__ import annotations

import warnings
from typing import Callable, Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ClusterWarning, RankDeficient, SolverStall

__all__ = [
    "cg_solve",
    "smallest_eigenpairs",
    "rank_gfp",
    "gram_orthonormalize",
    "random_primes",
]

#: primes drawn from this half-open range for GF(p) ranks
_PRIME_LOW = 1_000_003
_PRIME_HIGH = 2_000_000


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def random_primes(count: int, seed: int = 0) -> list[int]:
    """Draw ``count`` distinct primes > 10**6 (deterministic in ``seed``)."""
    rng = np.random.default_rng(seed)
    primes: list[int] = []
    while len(primes) < count:
        n = int(rng.integers(_PRIME_LOW, _PRIME_HIGH)) | 1
        while not _is_prime(n):
            n += 2
        if n not in primes:
            primes.append(n)
    return primes


def cg_solve(
    A,
    b: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 0,
    projector: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    x0: Optional[np.ndarray] = None,
    track_energy: bool = False,
    precond: Optional[np.ndarray] = None,
):
    """Conjugate gradients for a symmetric positive semidefinite operator.

    Parameters
    ----------
    A : sparse matrix, ndarray or LinearOperator
        Symmetric PSD operator.
    b : ndarray
        Right-hand side; must lie in range(A) up to ``projector``.
    tol : float
        Relative residual target ||Ax-b|| <= tol * ||b||.
    max_iter : int
        Iteration cap; defaults to 10 * dimension.
    projector : callable, optional
        Orthogonal projector onto the complement of a known kernel;
        applied to the rhs, the start vector and every residual
        (deflated CG).
    track_energy : bool
        When True, also return the per-iteration A-norm energy
        0.5 x'Ax - b'x (monotone decreasing along CG).
    precond : ndarray, optional
        Positive diagonal of a Jacobi preconditioner (applied as z = P r).

    Returns
    -------
    x : ndarray
        Solution with relative residual <= tol.
    history : list of float, only when ``track_energy``.

    Raises
    ------
    SolverStall
        When the tolerance is not met within ``max_iter`` iterations.
    """
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    matvec = A.dot if hasattr(A, "dot") else A
    if projector is not None:
        b = projector(b)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if projector is not None:
        x = projector(x)
    r = b - matvec(x)
    if projector is not None:
        r = projector(r)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return (x, [0.0]) if track_energy else x
    z = r * precond if precond is not None else r
    p = z.copy()
    rz = float(r @ z)
    limit = max_iter if max_iter > 0 else 10 * n
    history = []
    for it in range(limit):
        if np.linalg.norm(r) <= tol * bnorm:
            break
        Ap = matvec(p)
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            # Krylov space exhausted (rounding floor); accept only if the
            # residual is already essentially converged
            if np.linalg.norm(r) <= max(tol, 1e-10) * bnorm:
                break
            raise SolverStall(
                "indefinite or inconsistent system in CG",
                iterations=it, residual=float(np.linalg.norm(r)) / bnorm,
            )
        alpha = rz / pAp
        x = x + alpha * p
        r = r - alpha * Ap
        if projector is not None:
            r = projector(r)
        z = r * precond if precond is not None else r
        rz_new = float(r @ z)
        if track_energy:
            history.append(0.5 * float(x @ matvec(x)) - float(b @ x))
        p = z + (rz_new / rz) * p
        rz = rz_new
    else:
        raise SolverStall(
            f"CG stalled after {limit} iterations",
            iterations=limit, residual=float(np.linalg.norm(r)) / bnorm,
        )
    return (x, history) if track_energy else x


def _as_dense(A) -> np.ndarray:
    if sp.issparse(A):
        return A.toarray()
    return np.asarray(A, dtype=float)


def _bandwidth(A: sp.spmatrix) -> int:
    coo = A.tocoo()
    if coo.nnz == 0:
        return 0
    return int(np.max(np.abs(coo.row - coo.col)))


def smallest_eigenpairs(
    S,
    M: np.ndarray,
    count: int,
    tol: float = 1e-10,
    seed: int = 0,
    dense_cutoff: int = 1200,
):
    """Smallest eigenpairs of the generalized problem S x = lambda M x.

    Parameters
    ----------
    S : sparse or dense symmetric PSD matrix.
    M : ndarray
        Positive diagonal of the mass operator (1-D array).
    count : int
        Number of pairs, ascending.
    tol : float
        Residual target ||S x - lambda M x|| <= tol * ||M x|| per pair.
    seed : int
        Seed for solver start vectors (bit-reproducible results).
    dense_cutoff : int
        Below this dimension the symmetrized problem is solved densely.

    Returns
    -------
    (eigenvalues, vectors) : ascending ndarray (count,), ndarray (n, count)
        Vectors are M-orthonormal.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if count < 1 or count > n:
        raise ValueError(f"count {count} out of range for dimension {n}")
    if np.any(M <= 0):
        raise ValueError("mass diagonal must be strictly positive")
    d = 1.0 / np.sqrt(M)
    sym = sp.issparse(S)
    if sym:
        A = sp.diags(d) @ S @ sp.diags(d)
        A = (A + A.T) * 0.5
    else:
        A = d[:, None] * np.asarray(S, dtype=float) * d[None, :]
        A = (A + A.T) * 0.5

    if sym and n > dense_cutoff and _bandwidth(A) <= 1:
        dense_band = A.todia()
        main = dense_band.diagonal(0)
        off = dense_band.diagonal(1)
        vals, vecs = scipy.linalg.eigh_tridiagonal(
            main, off, select="i", select_range=(0, count - 1)
        )
    elif n <= dense_cutoff or count > n // 4:
        vals, vecs = scipy.linalg.eigh(_as_dense(A))
        vals, vecs = vals[:count], vecs[:, :count]
    else:
        # shift-invert around a negative sigma keeps S - sigma*M definite
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n)
        scale = float(np.max(np.abs(A.diagonal()))) or 1.0
        try:
            vals, vecs = spla.eigsh(
                A.tocsc(), k=count, sigma=-1e-2 * scale, which="LM", v0=v0,
                tol=tol,
            )
        except Exception as exc:  # ARPACK non-convergence
            if n <= 6000:
                vals, vecs = scipy.linalg.eigh(_as_dense(A))
                vals, vecs = vals[:count], vecs[:, :count]
            else:
                raise SolverStall(f"eigensolver failed: {exc}") from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]

    tiny = np.abs(vals) < 1e-13 * max(1.0, abs(float(vals[-1])))
    vals = np.where(tiny, 0.0, vals)

    # residuals in symmetrized coordinates (scale-aware)
    Amat = (A.dot if hasattr(A, "dot") else A)
    scaleA = max(float(np.max(np.abs(A.diagonal()))), 1.0)
    for j in range(count):
        y = vecs[:, j] / max(np.linalg.norm(vecs[:, j]), 1e-300)
        res = np.linalg.norm(Amat(y) - vals[j] * y)
        if res > max(tol, 1e-8) * scaleA:
            raise SolverStall(
                f"eigenpair {j} residual {res:.2e} above tolerance", residual=res
            )

    x = d[:, None] * vecs
    # enforce exact M-orthonormality within degenerate clusters
    x = gram_orthonormalize(list(x.T), M)
    x = np.column_stack(x)

    scale = max(abs(float(vals[-1])), 1e-300)
    positive = vals > 1e-9 * scale
    if np.any(np.diff(vals)[positive[1:] & positive[:-1]] < 1e-10):
        warnings.warn("eigenvalue spacing below 1e-10", ClusterWarning, stacklevel=2)
    return np.asarray(vals, dtype=float), x


def rank_gfp(matrix, prime: int) -> int:
    """Row-echelon rank of an integer matrix over GF(prime).

    Entries are reduced mod ``prime``; elimination is vectorized row-wise
    on int64 (products stay below 2**63 for primes < 2**31 / entries).
    """
    A = np.asarray(_as_dense(matrix))
    if A.size == 0:
        return 0
    A = np.remainder(A.astype(np.int64), prime)
    rows, cols = A.shape
    rank = 0
    for c in range(cols):
        pivot = None
        for r in range(rank, rows):
            if A[r, c] % prime != 0:
                pivot = r
                break
        if pivot is None:
            continue
        if pivot != rank:
            A[[rank, pivot]] = A[[pivot, rank]]
        inv = pow(int(A[rank, c]), prime - 2, prime)
        A[rank] = (A[rank] * inv) % prime
        mask = np.arange(rows) != rank
        factors = A[mask, c].copy()
        nonzero = factors != 0
        if np.any(nonzero):
            idx = np.where(mask)[0][nonzero]
            A[idx] = (A[idx] - np.outer(factors[nonzero], A[rank])) % prime
        rank += 1
        if rank == rows:
            break
    return rank


def gram_orthonormalize(vectors, M: np.ndarray, drop_tol: float = 1e-12):
    """M-orthonormalize a list of vectors (two-pass modified Gram-Schmidt).

    Parameters
    ----------
    vectors : sequence of ndarray
        Linearly independent to working precision.
    M : ndarray
        Positive diagonal weights of the inner product.
    drop_tol : float
        Relative norm collapse that flags dependence.

    Returns
    -------
    list of ndarray, M-orthonormal with the same span.

    Raises
    ------
    RankDeficient
        With the detected numerical rank when a vector collapses.
    """
    M = np.asarray(M, dtype=float)
    out: list[np.ndarray] = []
    for i, v in enumerate(vectors):
        w = np.array(v, dtype=float)
        scale = np.sqrt(float(w @ (M * w)))
        if scale == 0.0:
            raise RankDeficient(f"vector {i} is zero", rank=len(out))
        for _ in range(2):
            for q in out:
                w = w - (q @ (M * w)) * q
        nrm = np.sqrt(float(w @ (M * w)))
        if nrm < drop_tol * scale:
            raise RankDeficient(
                f"vector {i} numerically dependent on previous ones", rank=len(out)
            )
        out.append(w / nrm)
    return out

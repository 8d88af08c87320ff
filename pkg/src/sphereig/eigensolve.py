"""Sparse symmetric generalized eigensolvers K x = mu M x.

Two routes to the low end of the spectrum: a dense LAPACK reduction for
desk-scale systems and ARPACK shift-invert Lanczos with a deterministic
start vector.  Both return M-orthonormal eigenvectors with a fixed sign
convention so repeated runs are bit-identical.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from sphereig.errors import InputError, SolverError

__all__ = [
    "SparseSymmetric",
    "dense_generalized",
    "lanczos_shift_invert",
    "deflate_constants",
    "default_shift",
    "residual_norms",
]

DENSE_LIMIT = 3000


@dataclass
class SparseSymmetric:
    """Lower-triangle coordinate storage of a symmetric sparse matrix."""

    n: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    @classmethod
    def from_csr(cls, mat):
        coo = sp.tril(mat).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return cls(n=mat.shape[0], rows=coo.row[order], cols=coo.col[order],
                   vals=coo.data[order])

    def to_csr(self):
        lower = sp.coo_matrix((self.vals, (self.rows, self.cols)),
                              shape=(self.n, self.n)).tocsr()
        diag = sp.diags(lower.diagonal())
        return (lower + lower.T - diag).tocsr()


def _fix_signs(vecs):
    """Make the largest-magnitude entry of each column positive."""
    for j in range(vecs.shape[1]):
        i = int(np.argmax(np.abs(vecs[:, j])))
        if vecs[i, j] < 0.0:
            vecs[:, j] = -vecs[:, j]
    return vecs


def default_shift(K, M):
    """Negative shift keeping K - sigma*M positive definite for Neumann kernels."""
    return -0.1 * (K.diagonal().sum() / M.diagonal().sum())


def residual_norms(K, M, vals, vecs):
    """||K x - mu M x||_{M^{-1}} per eigenpair (via a sparse solve)."""
    R = K @ vecs - M @ vecs * vals[None, :]
    solve = spla.factorized(M.tocsc())
    out = np.empty(vals.size)
    for j in range(vals.size):
        out[j] = np.sqrt(abs(float(R[:, j] @ solve(R[:, j]))))
    return out


def polish(K, M, vals, vecs, target=1e-9):
    """Drive M^{-1}-norm residuals below ``target`` by inverse iteration.

    Mass matrices with near-vanishing weights (the S^3 symmetry lines)
    amplify machine-level Krylov residuals in the M^{-1} norm; one inverse
    iteration per eigenvalue cluster with a slightly offset Rayleigh shift
    repairs this.  A final Rayleigh-Ritz projection restores M-orthonormal
    vectors and monotone values.
    """
    res = residual_norms(K, M, vals, vecs)
    if np.max(res) <= target:
        return vals, vecs
    X = np.array(vecs, dtype=float)
    scale = 1.0 + float(np.max(np.abs(vals)))
    i = 0
    while i < vals.size:
        j = i
        while j + 1 < vals.size and vals[j + 1] - vals[i] < 1e-6 * scale:
            j += 1
        if np.max(res[i:j + 1]) > target:
            sigma = float(np.mean(vals[i:j + 1])) + 1e-5 * scale
            lu = spla.splu((K - sigma * M).tocsc())
            for c in range(i, j + 1):
                y = lu.solve(M @ X[:, c])
                X[:, c] = y / np.sqrt(abs(float(y @ (M @ y))))
        i = j + 1
    A = X.T @ (K @ X)
    B = X.T @ (M @ X)
    ritz_vals, C = la.eigh(0.5 * (A + A.T), 0.5 * (B + B.T))
    return ritz_vals, _fix_signs(X @ C)


def dense_generalized(K, M, count):
    """Smallest ``count`` eigenpairs by dense reduction (n <= 3000)."""
    n = K.shape[0]
    if n > DENSE_LIMIT:
        raise InputError(f"dense path limited to n <= {DENSE_LIMIT}, got {n}")
    if count < 1 or count > n:
        raise InputError(f"count must be in [1, {n}]")
    Kd = K.toarray() if sp.issparse(K) else np.asarray(K, dtype=float)
    Md = M.toarray() if sp.issparse(M) else np.asarray(M, dtype=float)
    try:
        vals, vecs = la.eigh(Kd, Md, subset_by_index=[0, count - 1])
    except la.LinAlgError as exc:
        raise SolverError(f"mass matrix not positive definite: {exc}") from exc
    return vals, _fix_signs(vecs)


def lanczos_shift_invert(K, M, count, sigma=None, maxiter=None):
    """Eigenvalues nearest sigma via ARPACK shift-invert Lanczos.

    The start vector is the M-normalized all-ones vector, so runs are
    deterministic.  ARPACK factorizes K - sigma*M once (sparse LU).
    """
    n = K.shape[0]
    if count < 1 or count >= n:
        raise InputError(f"count must be in [1, {n - 1}] for the iterative path")
    if sigma is None:
        sigma = default_shift(K, M)
    if maxiter is None:
        maxiter = 10 * count + 100
    ones = np.ones(n)
    v0 = ones / np.sqrt(float(ones @ (M @ ones)))
    try:
        vals, vecs = spla.eigsh(K.tocsc(), k=count, M=M.tocsc(), sigma=sigma,
                                which="LM", v0=v0, maxiter=maxiter, tol=0)
    except spla.ArpackNoConvergence as exc:
        raise SolverError(f"ARPACK did not converge: {exc}") from exc
    except RuntimeError as exc:
        raise SolverError(f"shift-invert factorization failed: {exc}") from exc
    order = np.argsort(vals)
    return vals[order], _fix_signs(vecs[:, order])


@dataclass
class DeflatedConstants:
    """M-orthogonal projector against the constant vector.

    ``apply`` removes the constant component; ``solve_smallest`` runs the
    shift-invert iteration on the rank-one-penalized pencil, so the zero
    mode is pushed above the window and mu_1 is the smallest retained
    eigenvalue.
    """

    M: object
    c: np.ndarray          # M-normalized constant vector
    penalty: float

    def apply(self, x):
        return x - self.c * float(self.c @ (self.M @ x))

    def solve_smallest(self, K, count, sigma=None):
        n = K.shape[0]
        if sigma is None:
            sigma = default_shift(K, M=self.M)
        u = self.M @ self.c
        beta = self.penalty
        A = (K - sigma * self.M).tocsc()
        lu = spla.splu(A)
        Au = lu.solve(u)
        denom = 1.0 + beta * float(u @ Au)

        def op_inv(x):
            Ax = lu.solve(x)
            return Ax - Au * (beta * float(u @ Ax) / denom)

        def op_mat(x):
            return K @ x + u * (beta * float(u @ x))

        shape = (n, n)
        OPinv = spla.LinearOperator(shape, matvec=op_inv)
        Kpen = spla.LinearOperator(shape, matvec=op_mat)
        v0 = np.ones(n)
        v0 /= np.sqrt(float(v0 @ (self.M @ v0)))
        vals, vecs = spla.eigsh(Kpen, k=count, M=self.M.tocsc(), sigma=sigma,
                                OPinv=OPinv, which="LM", v0=v0, tol=0)
        order = np.argsort(vals)
        return vals[order], _fix_signs(vecs[:, order])


def deflate_constants(K, M):
    """Projector data for pencils whose stiffness kernel is the constants."""
    n = K.shape[0]
    ones = np.ones(n)
    k1 = K @ ones
    if np.max(np.abs(k1)) > 1e-10 * max(1.0, abs(K.diagonal()).max()):
        raise InputError("constants are not in the kernel of K")
    c = ones / np.sqrt(float(ones @ (M @ ones)))
    penalty = 10.0 * (K.diagonal().sum() / M.diagonal().sum())
    return DeflatedConstants(M=M, c=c, penalty=penalty)

"""Independent finite-difference oracle for the radial cap eigenproblems.

A conservative second-order discretization on a cell-centered grid, kept
deliberately separate from the shooting solver: fluxes use the sin^{N-1}
weight at cell faces, the Neumann condition enters as a vanishing flux at
the gamma face, and the weight's zero at theta = 0 closes the left end.
Eigenvalues from two grids are Richardson-extrapolated.
"""

import numpy as np
from scipy.linalg import eigh_tridiagonal


def cap_eigenvalue_fd(dim, gamma, l, k, n=10000):
    """mu_{l,k} by dense FD on n cells, Richardson-extrapolated with 2n."""
    coarse = _solve(dim, gamma, l, k, n)
    fine = _solve(dim, gamma, l, k, 2 * n)
    return (4.0 * fine - coarse) / 3.0


def _solve(dim, gamma, l, k, n):
    h = gamma / n
    centers = (np.arange(n) + 0.5) * h
    faces = np.arange(1, n) * h
    w_face = np.sin(faces) ** (dim - 1)
    w_cell = np.sin(centers) ** (dim - 1)

    main = np.zeros(n)
    main[:-1] += w_face / h**2
    main[1:] += w_face / h**2
    off = -w_face / h**2
    main += l * (l + dim - 2) / np.sin(centers) ** 2 * w_cell

    # symmetrize the generalized pencil with D = diag(w_cell^{-1/2})
    d = np.sqrt(w_cell)
    vals = eigh_tridiagonal(main / w_cell, off / (d[:-1] * d[1:]),
                            select="i", select_range=(0, k), eigvals_only=True)
    return vals[k - 1]

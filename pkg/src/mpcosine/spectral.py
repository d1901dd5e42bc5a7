"""Finite-difference generator, spectrum, resolvent, and expm oracle.

The generator is the second derivative with the coupled conditions
``f'(0) = f(1) - f(0) = f'(1)``.  Interior rows are the standard 3-point
Laplacian; the boundary rows eliminate ghost nodes using centred first
derivatives, which couples each end to the opposite endpoint value:

    row 0:  ( 2/h^2)(f_1 - f_0)      - (2/h)(f_N - f_0)
    row N:  ( 2/h^2)(f_{N-1} - f_N)  + (2/h)(f_N - f_0)

These rows annihilate both equilibrium directions (the constant and
``12x - 6``) exactly, and the matrix is self-adjoint in the trapezoid
inner product, so the eigenproblem is solved in symmetrised form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import brentq

from .errors import InvariantError, NearSingularError, RangeError
from .grid import GridFunction, simpson_weights
from .volterra import cumulative_exp_integral

__all__ = [
    "SpectralModel",
    "ResolventSolution",
    "build_model",
    "expm_oracle",
    "resolve",
    "spectral_gap",
    "boundary_mode_equation",
    "reference_eigenvalues",
    "refined_modes_mp",
]


def _operator_matrix(n_cells: int) -> np.ndarray:
    N = n_cells
    h = 1.0 / N
    A = np.zeros((N + 1, N + 1))
    for j in range(1, N):
        A[j, j - 1] = A[j, j + 1] = 1.0 / h**2
        A[j, j] = -2.0 / h**2
    A[0, 0] = -2.0 / h**2 + 2.0 / h
    A[0, 1] = 2.0 / h**2
    A[0, N] = -2.0 / h
    A[N, N] = -2.0 / h**2 + 2.0 / h
    A[N, N - 1] = 2.0 / h**2
    A[N, 0] = -2.0 / h
    return A


def _trapezoid_weights(n_cells: int) -> np.ndarray:
    d = np.full(n_cells + 1, 1.0 / n_cells)
    d[0] *= 0.5
    d[-1] *= 0.5
    return d


@dataclass(frozen=True)
class SpectralModel:
    """Dense FD model of the generator with its eigen-decomposition.

    ``eigenvalues`` are sorted descending (two zeros first), and the
    eigenvector columns are orthonormal in the trapezoid inner product.
    """

    n_cells: int
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvector_matrix: np.ndarray  # columns, trapezoid-orthonormal
    d_weights: np.ndarray

    @property
    def gap(self) -> float:
        """Distance from the double zero down to the rest of the spectrum."""
        return -float(self.eigenvalues[2])

    @cached_property
    def eigenvectors(self) -> tuple[GridFunction, ...]:
        return tuple(
            GridFunction(self.eigenvector_matrix[:, k])
            for k in range(self.eigenvector_matrix.shape[1])
        )

    def coefficients(self, f: GridFunction) -> np.ndarray:
        """Expansion coefficients of ``f`` in the eigenbasis."""
        return self.eigenvector_matrix.T @ (self.d_weights * f.values)

    def kernel_projection(self, f: GridFunction) -> np.ndarray:
        """Trapezoid-orthogonal projection onto the two zero modes."""
        c = self.coefficients(f)
        return self.eigenvector_matrix[:, :2] @ c[:2]


def build_model(n_cells: int) -> SpectralModel:
    """Assemble the FD generator and eigen-decompose it.

    Validates the spectral contract on construction: exactly two eigenvalues
    within ``1e3 h^2`` of zero, nothing above that band, and the two
    equilibrium directions reproduced by the near-zero eigenspace to
    ``1e2 h^2``.
    """
    if n_cells < 32:
        raise RangeError(f"n_cells must be >= 32 for the FD model, got {n_cells}")
    A = _operator_matrix(n_cells)
    d = _trapezoid_weights(n_cells)
    s = np.sqrt(d)
    S = (s[:, None] * A) / s[None, :]
    sym_dev = float(np.max(np.abs(S - S.T)))
    if sym_dev > 1e-7 * np.max(np.abs(S)):
        raise InvariantError(f"symmetrised operator deviates by {sym_dev:.2e}")
    S = 0.5 * (S + S.T)
    lam, Q = eigh(S)
    order = np.argsort(lam)[::-1]
    lam = lam[order]
    V = Q[:, order] / s[:, None]

    model = SpectralModel(
        n_cells=n_cells,
        matrix=A,
        eigenvalues=lam,
        eigenvector_matrix=V,
        d_weights=d,
    )
    _validate_spectrum(model)
    return model


def _validate_spectrum(model: SpectralModel) -> None:
    h2 = 1.0 / model.n_cells**2
    tol0 = 1e3 * h2
    lam = model.eigenvalues
    near_zero = int(np.sum(np.abs(lam) <= tol0))
    if near_zero != 2:
        raise InvariantError(
            f"expected exactly 2 eigenvalues within {tol0:.2e} of zero, got {near_zero}"
        )
    if float(lam[0]) > tol0:
        raise InvariantError(f"positive eigenvalue {lam[0]:.3e} beyond {tol0:.2e}")
    if float(lam[2]) >= -0.5:
        raise InvariantError(f"third eigenvalue {lam[2]:.3e} is not below -0.5")
    x = np.linspace(0.0, 1.0, model.n_cells + 1)
    for name, vec in (("constant", np.ones_like(x)), ("12x-6", 12.0 * x - 6.0)):
        gf = GridFunction(vec)
        res = gf.values - model.kernel_projection(gf)
        dev = float(np.max(np.abs(res)))
        if dev > 1e2 * h2 * (1.0 + gf.sup_norm()):
            raise InvariantError(
                f"near-zero eigenspace misses {name}: residual {dev:.2e}"
            )


def expm_oracle(model: SpectralModel, f: GridFunction, t: float) -> GridFunction:
    """Apply ``exp(t * matrix)`` to the samples through the eigenbasis.

    Serves as the independent cross-check for the Weierstrass semigroup.
    """
    if t < 0.0:
        raise RangeError(f"oracle time must be >= 0, got {t}")
    if f.n_cells != model.n_cells:
        raise RangeError(
            f"grid mismatch: function has {f.n_cells} cells, model {model.n_cells}"
        )
    c = model.coefficients(f)
    decayed = np.exp(model.eigenvalues * t) * c
    return GridFunction(model.eigenvector_matrix @ decayed)


def spectral_gap(model: SpectralModel, finer: SpectralModel | None = None) -> float:
    """Gap ``-lambda_3``; Richardson-extrapolated when a 2x model is given."""
    if finer is None:
        return model.gap
    if finer.n_cells != 2 * model.n_cells:
        raise ValueError("Richardson extrapolation expects a 2x finer model")
    return (4.0 * finer.gap - model.gap) / 3.0


def boundary_mode_equation(mu: float) -> float:
    """Eigenvalue condition for modes ``-mu^2``: zero iff mode admissible.

    Imposing the coupled boundary conditions on ``C1 e^(i mu x) +
    C2 e^(-i mu x)`` reduces to ``mu sin(mu) + 2 cos(mu) - 2 = 0``; the two
    factors are the even branch ``sin(mu/2) = 0`` and the odd branch
    ``tan(mu/2) = mu/2``.
    """
    return mu * math.sin(mu) + 2.0 * math.cos(mu) - 2.0


def reference_eigenvalues(count: int) -> list[float]:
    """First ``count`` nonzero eigenvalues from the transcendental condition.

    Independent oracle for the FD spectrum: brackets roots of
    :func:`boundary_mode_equation` on a fine scan and polishes with brentq.
    """
    roots: list[float] = []
    mu_prev = 1e-3
    f_prev = boundary_mode_equation(mu_prev)
    mu = mu_prev
    step = 1e-3
    while len(roots) < count:
        mu += step
        f_cur = boundary_mode_equation(mu)
        if f_prev == 0.0:
            roots.append(mu_prev)
        elif f_prev * f_cur < 0.0:
            roots.append(float(brentq(boundary_mode_equation, mu_prev, mu)))
        mu_prev, f_prev = mu, f_cur
    return [-r * r for r in roots[:count]]


# ---------------------------------------------------------------------------
# Resolvent: solve lambda f - f'' = g with the coupled boundary conditions.


@dataclass(frozen=True)
class ResolventSolution:
    """Solution of ``lam f - f'' = g`` in the generator's domain.

    ``c1, c2`` are the coefficients of ``exp(+sqrt(lam) x)`` and
    ``exp(-sqrt(lam) x)`` in the general solution; ``determinant`` is the
    determinant of the 2x2 boundary system, which in closed form equals
    ``4 q + 2 q^2 sinh q - 4 q cosh q`` with ``q = sqrt(lam)``.
    """

    lam: float
    c1: float
    c2: float
    solution: GridFunction
    determinant: float


def resolvent_determinant(lam: float) -> float:
    """Closed form of the boundary-system determinant for ``lam > 0``."""
    q = math.sqrt(lam)
    return 4.0 * q + 2.0 * lam * math.sinh(q) - 4.0 * q * math.cosh(q)


def resolve(g: GridFunction, lam: float) -> ResolventSolution:
    """Solve ``lam f - f'' = g`` with the moments-preserving boundary rows.

    The general solution is ``C1 e^(qx) + C2 e^(-qx) - (1/q) int_0^x
    sinh(q(x-y)) g(y) dy``; imposing the two boundary conditions gives a
    2x2 system whose right-hand sides involve ``int_0^1 sinh(q(1-y)) g``
    and ``int_0^1 cosh(q(1-y)) g``.
    """
    if lam <= 0.0:
        raise RangeError(f"resolve requires lam > 0, got {lam}")
    q = math.sqrt(lam)
    h = g.h
    iplus = cumulative_exp_integral(g.values, h, q)
    iminus = cumulative_exp_integral(g.values, h, -q)
    particular = -(iplus - iminus) / (2.0 * q)
    sinh_int = 0.5 * (iplus[-1] - iminus[-1])   # int sinh(q(1-y)) g(y) dy
    cosh_int = 0.5 * (iplus[-1] + iminus[-1])   # int cosh(q(1-y)) g(y) dy

    eq = math.exp(q)
    emq = math.exp(-q)
    a11 = q - eq + 1.0
    a12 = 1.0 - q - emq
    a21 = 1.0 + q * eq - eq
    a22 = 1.0 - q * emq - emq
    b1 = -sinh_int / q
    b2 = cosh_int - sinh_int / q

    det = a11 * a22 - a12 * a21
    scale = max(abs(a11 * a22), abs(a12 * a21), 1e-30)
    if abs(det) < 1e-12 * scale:
        raise NearSingularError(
            f"boundary system nearly singular at lam={lam}: det={det:.3e}"
        )
    c1 = (b1 * a22 - b2 * a12) / det
    c2 = (a11 * b2 - a21 * b1) / det

    x = g.x
    values = c1 * np.exp(q * x) + c2 * np.exp(-q * x) + particular
    return ResolventSolution(
        lam=lam,
        c1=float(c1),
        c2=float(c2),
        solution=GridFunction(values),
        determinant=float(det),
    )


def resolvent_residuals(sol: ResolventSolution, g: GridFunction) -> dict[str, float]:
    """Interior PDE residual (central differences) and boundary residuals."""
    f = sol.solution
    v, h = f.values, f.h
    second = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h**2
    interior = float(
        np.max(np.abs(sol.lam * v[1:-1] - second - g.values[1:-1]))
    )
    d0 = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (
        12.0 * h
    )
    d1 = (25.0 * v[-1] - 48.0 * v[-2] + 36.0 * v[-3] - 16.0 * v[-4] + 3.0 * v[-5]) / (
        12.0 * h
    )
    jump = v[-1] - v[0]
    return {
        "interior": interior,
        "bc_left": abs(d0 - jump),
        "bc_right": abs(d1 - jump),
    }


# ---------------------------------------------------------------------------
# Extended-precision eigenpairs (Rayleigh-quotient iteration in mpmath).
#
# The spectral gap is ~4 pi^2 ~ 39.5, so trajectory errors decay through
# ~100 decimal orders over t in [1,6]; resolving that decay requires
# arbitrary-precision arithmetic.  Float64 seeds from build_model are
# polished here against the exact (dyadic-entry) operator matrix.


def _mp_sym_parts(n_cells: int, mp):
    """Symmetrised operator as (diagonal, off-diagonal, corner) mp vectors.

    The symmetrised matrix is tridiagonal plus equal corner entries
    ``S[0,N] = S[N,0] = -2/h``; the first/last off-diagonals pick up the
    ``sqrt(2)`` weight ratio of the half trapezoid weights at the ends.
    """
    N = n_cells
    h2inv = mp.mpf(N) ** 2
    hinv = mp.mpf(N)
    sqrt2 = mp.sqrt(2)
    diag = [mp.mpf(0)] * (N + 1)
    off = [mp.mpf(0)] * N  # off[j] = S[j, j+1] = S[j+1, j]
    for j in range(1, N):
        diag[j] = -2 * h2inv
        off[j] = h2inv
    diag[0] = -2 * h2inv + 2 * hinv
    diag[N] = -2 * h2inv + 2 * hinv
    off[0] = sqrt2 * h2inv
    off[N - 1] = sqrt2 * h2inv
    corner = -2 * hinv
    return diag, off, corner


def _mp_sym_matvec(diag, off, corner, w, mp):
    N = len(diag) - 1
    out = [mp.mpf(0)] * (N + 1)
    for i in range(N + 1):
        acc = diag[i] * w[i]
        if i > 0:
            acc += off[i - 1] * w[i - 1]
        if i < N:
            acc += off[i] * w[i + 1]
        out[i] = acc
    out[0] += corner * w[N]
    out[N] += corner * w[0]
    return out


def _mp_tridiag_solve(diag, off, sigma, b, mp):
    """Thomas solve of ``(T - sigma I) x = b`` for the tridiagonal part."""
    N = len(diag) - 1
    c = [mp.mpf(0)] * N
    d = [mp.mpf(0)] * (N + 1)
    denom = diag[0] - sigma
    c[0] = off[0] / denom
    d[0] = b[0] / denom
    for i in range(1, N + 1):
        denom = (diag[i] - sigma) - off[i - 1] * c[i - 1]
        if i < N:
            c[i] = off[i] / denom
        d[i] = (b[i] - off[i - 1] * d[i - 1]) / denom
    x = [mp.mpf(0)] * (N + 1)
    x[N] = d[N]
    for i in range(N - 1, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def _mp_shifted_solve(diag, off, corner, sigma, b, mp):
    """Solve ``(S - sigma I) x = b`` via Woodbury on the two corner entries."""
    N = len(diag) - 1
    e0 = [mp.mpf(0)] * (N + 1)
    eN = [mp.mpf(0)] * (N + 1)
    e0[0] = mp.mpf(1)
    eN[N] = mp.mpf(1)
    y = _mp_tridiag_solve(diag, off, sigma, b, mp)
    z0 = _mp_tridiag_solve(diag, off, sigma, e0, mp)
    zN = _mp_tridiag_solve(diag, off, sigma, eN, mp)
    # M = T + U V^T with U = [e0, eN], V = [corner*eN, corner*e0];
    # Woodbury reduces the corner correction to a 2x2 solve.
    k11 = 1 + corner * z0[N]
    k12 = corner * zN[N]
    k21 = corner * z0[0]
    k22 = 1 + corner * zN[0]
    r1 = corner * y[N]
    r2 = corner * y[0]
    det = k11 * k22 - k12 * k21
    a = (r1 * k22 - r2 * k12) / det
    bcoef = (k11 * r2 - k21 * r1) / det
    return [y[i] - a * z0[i] - bcoef * zN[i] for i in range(N + 1)]


def y_dot(u, v):
    return sum(ui * vi for ui, vi in zip(u, v))


def refined_modes_mp(model: SpectralModel, mode_indices, dps: int = 130):
    """Polish selected eigenpairs of the FD operator to ``dps`` digits.

    Returns ``(lambdas, vectors)`` with vectors orthonormal in the trapezoid
    inner product (mpmath matrices).  Rayleigh-quotient iteration on the
    symmetrised operator converges cubically from the float64 seeds; solves
    use a Thomas/Woodbury split of the tridiagonal-plus-corners structure.
    """
    import mpmath as mp

    with mp.workdps(dps):
        N = model.n_cells
        diag, off, corner = _mp_sym_parts(N, mp)
        d = [mp.mpf(1) / N for _ in range(N + 1)]
        d[0] /= 2
        d[-1] /= 2
        s = [mp.sqrt(di) for di in d]

        def normalize(w):
            norm = mp.sqrt(y_dot(w, w))
            return [wi / norm for wi in w]

        target_res = mp.mpf(10) ** (-(dps - 10))
        lambdas = []
        vectors = []
        for k in mode_indices:
            w = normalize(
                [mp.mpf(float(model.eigenvector_matrix[i, k])) * s[i] for i in range(N + 1)]
            )
            sigma = mp.mpf(float(model.eigenvalues[k]))
            for _ in range(8):
                try:
                    z = _mp_shifted_solve(diag, off, corner, sigma, w, mp)
                except ZeroDivisionError:
                    break  # shift equals an eigenvalue to working precision
                w = normalize(z)
                Sw = _mp_sym_matvec(diag, off, corner, w, mp)
                sigma = y_dot(w, Sw)
                residual = mp.sqrt(
                    y_dot(
                        [Sw[i] - sigma * w[i] for i in range(N + 1)],
                        [Sw[i] - sigma * w[i] for i in range(N + 1)],
                    )
                )
                if residual < target_res:
                    break
            vectors.append(mp.matrix([w[i] / s[i] for i in range(N + 1)]))
            lambdas.append(sigma)
        return lambdas, vectors

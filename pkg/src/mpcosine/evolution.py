"""Cosine-family and heat-semigroup evolution on [0,1].

The cosine family is the shifted average ``(C(t)f)(x) = (ext(x+t) +
ext(x-t))/2`` of the moments-preserving extension, restricted back to the
unit interval.  The semigroup is its Gaussian average

    S(t)f = (pi t)^(-1/2) int_0^inf exp(-tau^2/(4t)) C(tau)f dtau,

evaluated by composite Simpson in tau with the tau step equal to the grid
step so every shift is grid aligned.  Also here: the rank-2 equilibrium
projection, the odd-part isomorphism onto functions vanishing at 0, and
the moment-order boundary-condition checker.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import RangeError
from .extension import NMAX_LIMIT, ExtendedFunction, integral_extension
from .grid import GridFunction, moment, sample, split_even_odd

__all__ = [
    "EvolutionMethod",
    "EvolutionResult",
    "BoundaryCheckResult",
    "cosine_apply",
    "cosine_equation_check",
    "semigroup_apply",
    "projection_P",
    "odd_isomorphism",
    "odd_isomorphism_inverse",
    "bc_checker",
    "required_nmax",
    "f0",
    "f1",
]

WEIERSTRASS_DELTA = 1e-14  # integrand cutoff defining the ideal tau range
TAIL_BOUND_LIMIT = 1e-10   # recorded truncation bound must stay below this


class EvolutionMethod(enum.Enum):
    DALEMBERT_COSINE = "dalembert-cosine"
    WEIERSTRASS = "weierstrass"
    FD_EXPM_ORACLE = "fd-expm-oracle"


@dataclass(frozen=True)
class EvolutionResult:
    """Evolved state plus the diagnostics that certify it.

    ``moment_drift`` is ``(|F0 drift|, |F1 drift|)`` against the initial
    state; ``quadrature_tail_bound`` is the recorded operator-norm bound on
    the truncated Gaussian tail (0.0 for the cosine family).
    """

    state: GridFunction
    time: float
    method: EvolutionMethod
    moment_drift: tuple[float, float]
    quadrature_tail_bound: float = 0.0

    def __post_init__(self):
        if min(self.moment_drift) < 0.0:
            raise ValueError("moment drift components must be >= 0")
        if (
            self.method is EvolutionMethod.WEIERSTRASS
            and self.quadrature_tail_bound >= TAIL_BOUND_LIMIT
        ):
            raise ValueError(
                f"tail bound {self.quadrature_tail_bound:.2e} out of contract"
            )


def f0(n_cells: int) -> GridFunction:
    """The constant 1 (even equilibrium direction)."""
    return sample(lambda x: np.ones_like(np.asarray(x, dtype=float)), n_cells)


def f1(n_cells: int) -> GridFunction:
    """``12x - 6``: the odd equilibrium direction, normalised to F1 = 1."""
    return sample(lambda x: 12.0 * np.asarray(x, dtype=float) - 6.0, n_cells)


def _drift(state_values: np.ndarray, f: GridFunction) -> tuple[float, float]:
    state = GridFunction(state_values)
    return (
        abs(moment(state, 0) - moment(f, 0)),
        abs(moment(state, 1) - moment(f, 1)),
    )


def _shift_average(ext: ExtendedFunction, k: int) -> np.ndarray:
    """Nodes of ``(ext(x + k h) + ext(x - k h))/2`` for integer shift k."""
    N = ext.n_cells
    base = ext.n_max * N
    flat = ext.flat
    plus = flat[base + k : base + k + N + 1]
    minus = flat[base - k : base - k + N + 1]
    return 0.5 * (plus + minus)


def cosine_apply(
    f: GridFunction,
    t: float,
    n_max: int,
    snap: bool = True,
    _ext: ExtendedFunction | None = None,
) -> EvolutionResult:
    """Apply the moments-preserving cosine operator at time ``t``.

    With ``snap=True`` (default) ``t`` is moved to the nearest grid multiple
    so both shifts are exact node lookups; the snapped time is recorded in
    the result.  Off-grid times use local cubic interpolation instead, at an
    O(h^3) accuracy penalty.
    """
    if abs(t) > n_max:
        raise RangeError(f"|t|={abs(t)} exceeds n_max={n_max}")
    ext = _ext if _ext is not None else integral_extension(f, n_max)
    h = f.h
    k = round(t / h)
    if snap or abs(t - k * h) < 1e-12:
        t_used = k * h
        values = _shift_average(ext, abs(k))
    else:
        from .extension import eval_extension

        t_used = t
        x = f.x
        values = 0.5 * (
            eval_extension(ext, x + t) + eval_extension(ext, x - t)
        )
    return EvolutionResult(
        state=GridFunction(values),
        time=t_used,
        method=EvolutionMethod.DALEMBERT_COSINE,
        moment_drift=_drift(values, f),
    )


def cosine_equation_check(f: GridFunction, t: float, s: float) -> float:
    """Sup-norm of ``2 C(t)C(s)f - C(t+s)f - C(t-s)f``.

    The outer application re-extends the intermediate state, so the check
    genuinely exercises the claim that the evolution of the extension is
    the extension of the evolution.
    """
    n_inner = max(1, math.ceil(abs(s)))
    n_outer = max(1, math.ceil(abs(t)))
    n_sum = max(1, math.ceil(abs(t) + abs(s)))
    if n_sum > NMAX_LIMIT:
        raise RangeError(f"|t|+|s|={abs(t) + abs(s)} exceeds the extension cap")
    u = cosine_apply(f, s, n_inner).state
    lhs = 2.0 * cosine_apply(u, t, n_outer).state.values
    rhs = (
        cosine_apply(f, t + s, n_sum).state.values
        + cosine_apply(f, t - s, n_sum).state.values
    )
    return float(np.max(np.abs(lhs - rhs)))


def required_nmax(t: float, delta: float = WEIERSTRASS_DELTA) -> int:
    """Extension range needed by :func:`semigroup_apply` at time ``t``.

    One unit beyond the ideal truncation point, capped at the stability
    limit (the recorded tail bound still certifies accuracy at the cap).
    """
    tau_ideal = 2.0 * math.sqrt(t * math.log(1.0 / delta))
    return min(NMAX_LIMIT, int(math.ceil(tau_ideal)) + 1)


def semigroup_apply(
    f: GridFunction,
    t: float,
    n_max: int,
    delta: float = WEIERSTRASS_DELTA,
    _ext: ExtendedFunction | None = None,
) -> EvolutionResult:
    """Apply the heat semigroup via the Gaussian average of the cosine family.

    The tau integral runs over [0, tau_max] with tau_max the smaller of the
    cutoff ``2 sqrt(t ln(1/delta))`` and ``n_max``; the truncated-tail bound
    ``erfc(tau_max / (2 sqrt(t)))`` is recorded on the result and must come
    out below 1e-10, otherwise the call refuses and asks for a larger
    ``n_max`` or smaller ``t``.
    """
    if t < 0.0:
        raise RangeError(f"semigroup time must be >= 0, got {t}")
    if t == 0.0:
        return EvolutionResult(
            state=f,
            time=0.0,
            method=EvolutionMethod.WEIERSTRASS,
            moment_drift=(0.0, 0.0),
            quadrature_tail_bound=0.0,
        )
    h = f.h
    tau_ideal = 2.0 * math.sqrt(t * math.log(1.0 / delta))
    tau_max = min(tau_ideal, float(n_max))
    # even panel count for composite Simpson, shifts grid aligned
    K = int(math.floor(tau_max / h))
    K -= K % 2
    if K < 2:
        raise RangeError(f"grid too coarse to resolve the Gaussian at t={t}")
    tau_max_eff = K * h
    tail = float(erfc(tau_max_eff / (2.0 * math.sqrt(t))))
    if tail >= TAIL_BOUND_LIMIT:
        raise RangeError(
            f"truncation tail {tail:.2e} at tau_max={tau_max_eff:.3f} exceeds "
            f"{TAIL_BOUND_LIMIT}; raise n_max (cap {NMAX_LIMIT}) or reduce t={t}"
        )
    ext = _ext if _ext is not None else integral_extension(f, n_max)

    taus = np.arange(K + 1) * h
    simpson_coeff = np.full(K + 1, 2.0)
    simpson_coeff[1::2] = 4.0
    simpson_coeff[0] = simpson_coeff[-1] = 1.0
    weights = (
        (h / 3.0)
        * simpson_coeff
        * np.exp(-(taus**2) / (4.0 * t))
        / math.sqrt(math.pi * t)
    )

    N = f.n_cells
    base = ext.n_max * N
    flat = ext.flat
    out = np.zeros(N + 1)
    for k in range(K + 1):
        # pairwise sum first: the two shifts cancel the segment growth
        inner = flat[base + k : base + k + N + 1] + flat[base - k : base - k + N + 1]
        out += weights[k] * inner
    out *= 0.5

    return EvolutionResult(
        state=GridFunction(out),
        time=t,
        method=EvolutionMethod.WEIERSTRASS,
        moment_drift=_drift(out, f),
        quadrature_tail_bound=tail,
    )


def projection_P(f: GridFunction) -> GridFunction:
    """Rank-2 equilibrium projection ``(F0 f_even) 1 + (F1 f_odd) (12x - 6)``.

    Fixes both moments: F0 of the output equals F0 f and F1 equals F1 f.
    """
    even, odd = split_even_odd(f)
    c0 = moment(even, 0)
    c1 = moment(odd, 1)
    x = f.x
    return GridFunction(c0 + c1 * (12.0 * x - 6.0))


def _asymmetry(f: GridFunction) -> float:
    return 0.5 * float(np.max(np.abs(f.values + f.values[::-1])))


def odd_isomorphism(f_odd: GridFunction, tol: float = 1e-8) -> GridFunction:
    """Map an odd function to ``I f(x) = f((1-x)/2)`` (vanishing at x = 0).

    The map is an isometry onto functions on [0,1] vanishing at 0.  Nodes
    with even mirror index are exact lookups; the others are half-grid
    points filled by local cubic interpolation.
    """
    asym = _asymmetry(f_odd)
    if asym > tol:
        raise ValueError(
            f"input is not odd about 1/2: asymmetry {asym:.3e} > {tol}"
        )
    v = f_odd.values
    N = f_odd.n_cells
    from .extension import _interp_segment

    out = np.empty(N + 1)
    for j in range(N + 1):
        m = N - j  # target point (N - j) / (2N)
        if m % 2 == 0:
            out[j] = v[m // 2]
        else:
            out[j] = _interp_segment(v, m / (2.0 * N), f_odd.h)
    return GridFunction(out)


def odd_isomorphism_inverse(g: GridFunction, tol: float = 1e-8) -> GridFunction:
    """Inverse of :func:`odd_isomorphism`; exact index arithmetic.

    Requires ``g(0) = 0`` (the image space), otherwise the result would be
    discontinuous at x = 1/2.
    """
    scale = 1.0 + g.sup_norm()
    if abs(g.values[0]) > tol * scale:
        raise ValueError(
            f"g(0) = {g.values[0]!r} must vanish for the inverse to be continuous"
        )
    v = g.values
    N = g.n_cells
    out = np.empty(N + 1)
    half = N // 2
    for j in range(N + 1):
        if j < half:
            out[j] = v[N - 2 * j]
        else:
            out[j] = -v[2 * j - N]
    return GridFunction(out)


@dataclass(frozen=True)
class BoundaryCheckResult:
    """Residual of the moment-order-i boundary identity.

    order 0:   f'(0) = f'(1)
    order 1:   f'(1) = f(1) - f(0)
    order i>1: i f(1) = i(i-1) F_{i-2} f + f'(1)
    """

    order: int
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


def _endpoint_derivatives(f: GridFunction) -> tuple[float, float]:
    """4th-order one-sided estimates of f'(0) and f'(1)."""
    v, h = f.values, f.h
    d0 = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (
        12.0 * h
    )
    d1 = (25.0 * v[-1] - 48.0 * v[-2] + 36.0 * v[-3] - 16.0 * v[-4] + 3.0 * v[-5]) / (
        12.0 * h
    )
    return float(d0), float(d1)


def bc_checker(
    f: GridFunction,
    i: int,
    endpoint_derivatives: tuple[float, float] | None = None,
    tol: float = 1e-6,
) -> BoundaryCheckResult:
    """Check the boundary identity equivalent to preserving the moment F_i.

    Endpoint derivatives may be supplied; otherwise they are estimated with
    4th-order one-sided differences (exact for polynomials up to degree 4).
    """
    if i < 0:
        raise ValueError(f"moment order must be >= 0, got {i}")
    d0, d1 = (
        endpoint_derivatives
        if endpoint_derivatives is not None
        else _endpoint_derivatives(f)
    )
    v = f.values
    if i == 0:
        residual = abs(d0 - d1)
    elif i == 1:
        residual = abs(d1 - (v[-1] - v[0]))
    else:
        residual = abs(i * v[-1] - i * (i - 1) * moment(f, i - 2) - d1)
    return BoundaryCheckResult(order=i, residual=float(residual), tolerance=tol)

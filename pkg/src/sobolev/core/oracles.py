"""Ground-truth values for checking the estimators.

Every value is on the same scale as the estimators: sums of
``z^{2s} p~(z) conj(q~(z))`` with ``p~(z) = int exp(-i <z, x>) p(x) dx``, which
equals ``(2 pi)^D`` times the integral of the mixed derivatives.
"""

from __future__ import annotations

import functools
import itertools
import logging
import math
import sys
from collections.abc import Callable, Mapping, Sequence
from typing import Literal

import numpy as np
from scipy import integrate, special

from sobolev.core.densities import Factor1D, Family, NamedDensity, Piece
from sobolev.core.lattice import (
    LatticeSpec,
    MultiIndex,
    lattice_array,
    sobolev_weight,
    sobolev_weights,
)
from sobolev.errors import (
    InvalidParameterError,
    QuadratureError,
    SpecMismatchError,
    UnsupportedOracleError,
)

logger = logging.getLogger(__name__)

DensityFunction = Callable[[float], float]

QUAD_TOLERANCE = 1e-10
# Largest accepted quadrature error estimate before a coefficient counts as failed.
_QUAD_ACCEPT = 1e-8

# (family pair, orders) with a closed form. Pairs are unordered.
SUPPORTED_PAIRS: dict[frozenset[Family], frozenset[int]] = {
    frozenset({Family.GAUSSIAN}): frozenset({0, 1}),
    frozenset({Family.UNIFORM}): frozenset({0}),
    frozenset({Family.UNIFORM, Family.TRIANGULAR}): frozenset({0}),
    frozenset({Family.TRIANGULAR}): frozenset({0, 1}),
    frozenset({Family.GAUSSIAN, Family.UNIFORM}): frozenset({0}),
}


def _supported_listing() -> str:
    rows = []
    for pair, orders in SUPPORTED_PAIRS.items():
        names = sorted(f.value for f in pair)
        label = "-".join(names if len(names) == 2 else names * 2)
        rows.append(f"{label} (s in {sorted(orders)})")
    return ", ".join(rows)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def _normal_pdf(x: float, variance: float) -> float:
    return math.exp(-x * x / (2.0 * variance)) / math.sqrt(2.0 * math.pi * variance)


def _piecewise_integral(left: list[Piece], right: list[Piece]) -> float:
    """``int f g`` for piecewise polynomials, exact up to rounding."""
    total = []
    for a0, a1, pa in left:
        for b0, b1, pb in right:
            lo, hi = max(a0, b0), min(a1, b1)
            if lo < hi:
                antiderivative = (pa * pb).integ()
                total.append(float(antiderivative(hi) - antiderivative(lo)))
    return math.fsum(total)


def _derivative_pieces(factor: Factor1D) -> list[Piece]:
    if factor.family is Family.TRIANGULAR:
        low, mode, high = factor.params
        if not low < mode < high:
            raise UnsupportedOracleError(
                "A triangular density is in H^1 only with its apex strictly inside the support, "
                f"got {factor.params}."
            )
    return [(a, b, p.deriv()) for a, b, p in factor.pieces()]


def _factor_integral(a: Factor1D, b: Factor1D, s: int) -> float:
    """``int a^{(s)} b^{(s)} dx`` for one coordinate."""
    pair = frozenset({a.family, b.family})
    if s not in SUPPORTED_PAIRS.get(pair, frozenset()):
        raise UnsupportedOracleError(
            f"No closed form for {a.family.value}-{b.family.value} at s={s}. "
            f"Supported: {_supported_listing()}."
        )
    if pair == {Family.GAUSSIAN}:
        (m1, sd1), (m2, sd2) = a.params, b.params
        variance = sd1 * sd1 + sd2 * sd2
        d = m1 - m2
        base = _normal_pdf(d, variance)
        if s == 0:
            return base
        return base * (1.0 / variance - d * d / (variance * variance))
    if pair == {Family.GAUSSIAN, Family.UNIFORM}:
        gauss, unif = (a, b) if a.family is Family.GAUSSIAN else (b, a)
        mean, sd = gauss.params
        low, high = unif.params
        mass = special.ndtr((high - mean) / sd) - special.ndtr((low - mean) / sd)
        return float(mass) / (high - low)
    if s == 0:
        return _piecewise_integral(a.pieces(), b.pieces())
    return _piecewise_integral(_derivative_pieces(a), _derivative_pieces(b))


def _check_order(s: float) -> int:
    if s < 0 or not float(s).is_integer():
        raise UnsupportedOracleError(f"Closed forms exist for integer orders only, got s={s}.")
    return int(s)


def closed_form_quantity(a: NamedDensity, b: NamedDensity, s: float) -> float:
    """``(2 pi)^D int a^{(s)} b^{(s)}`` with the mixed derivative of order ``s`` per coordinate."""
    order = _check_order(s)
    if a.dimension != b.dimension:
        raise SpecMismatchError(f"Densities have dimensions {a.dimension} and {b.dimension}.")
    integral = math.prod(
        _factor_integral(fa, fb, order) for fa, fb in zip(a.factors, b.factors, strict=True)
    )
    return (2.0 * math.pi) ** a.dimension * integral


def closed_form_squared_distance(a: NamedDensity, b: NamedDensity, s: float) -> float:
    """``||a - b||^2`` on the estimator scale; the self terms must be supported too."""
    return math.fsum(
        [
            closed_form_quantity(a, a, s),
            -2.0 * closed_form_quantity(a, b, s),
            closed_form_quantity(b, b, s),
        ]
    )


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


def fourier_coefficient(
    f: DensityFunction,
    z: float,
    *,
    support: tuple[float, float] = (-math.pi, math.pi),
    breakpoints: Sequence[float] = (),
) -> tuple[complex, float]:
    """``int exp(-i z x) f(x) dx`` over ``support`` and its quadrature error estimate.

    The interval is split at ``breakpoints`` and each segment is integrated with
    QUADPACK's oscillatory rule.
    """
    low, high = support
    if not low < high:
        raise InvalidParameterError(f"Support must satisfy low < high, got {support}.")
    edges = sorted({low, high, *(p for p in breakpoints if low < p < high)})
    real, imag, error = [], [], 0.0
    for lo, hi in itertools.pairwise(edges):
        if z == 0:
            value, err = integrate.quad(f, lo, hi, epsabs=QUAD_TOLERANCE, limit=200)
            real.append(value)
            error += err
            continue
        cos_part, cos_err = integrate.quad(
            f, lo, hi, weight="cos", wvar=z, epsabs=QUAD_TOLERANCE, limit=200
        )
        sin_part, sin_err = integrate.quad(
            f, lo, hi, weight="sin", wvar=z, epsabs=QUAD_TOLERANCE, limit=200
        )
        real.append(cos_part)
        imag.append(-sin_part)
        error += cos_err + sin_err
    return complex(math.fsum(real), math.fsum(imag)), error


def _axis_coefficients(
    f: DensityFunction, zn: int, support: tuple[float, float], breakpoints: Sequence[float]
) -> np.ndarray:
    """Coefficients for ``k = -zn..zn`` of a real function; negative ``k`` by conjugation."""
    coeffs = np.empty(2 * zn + 1, dtype=np.complex128)
    worst_k, worst_err = 0, 0.0
    for k in range(zn + 1):
        value, err = fourier_coefficient(f, k, support=support, breakpoints=breakpoints)
        coeffs[zn + k] = value
        coeffs[zn - k] = value.conjugate()
        if err > worst_err:
            worst_k, worst_err = k, err
    if worst_err > _QUAD_ACCEPT:
        raise QuadratureError(
            f"Fourier coefficient at z={worst_k} has error estimate {worst_err:.2e} "
            f"(accepted up to {_QUAD_ACCEPT:.0e})."
        )
    return coeffs


def _density_coefficients(density: NamedDensity, zn: int) -> np.ndarray:
    per_axis = [
        _axis_coefficients(f.pdf, zn, f.support(), f.breakpoints()) for f in density.factors
    ]
    return functools.reduce(np.multiply.outer, per_axis).ravel()


def quadrature_truncated_inner(
    a: NamedDensity | DensityFunction,
    b: NamedDensity | DensityFunction,
    s: float,
    zn: int,
    *,
    support: tuple[float, float] = (-math.pi, math.pi),
    breakpoints: Sequence[float] = (),
) -> float:
    """Truncated target ``sum_{||z|| <= zn} z^{2s} a~(z) conj(b~(z))`` by quadrature.

    Named densities are integrated factor by factor over their own support, which
    gives the coefficients of their periodic summation. Plain callables are
    one-dimensional and integrated over ``support``.
    """
    if zn < 0:
        raise InvalidParameterError(f"Truncation radius must be non-negative, got {zn}.")
    if isinstance(a, NamedDensity) != isinstance(b, NamedDensity):
        raise InvalidParameterError("Pass two named densities or two density functions.")
    if isinstance(a, NamedDensity) and isinstance(b, NamedDensity):
        if a.dimension != b.dimension:
            raise SpecMismatchError(f"Densities have dimensions {a.dimension} and {b.dimension}.")
        spec = LatticeSpec(a.dimension, zn, s)
        coeffs_a = _density_coefficients(a, zn)
        coeffs_b = coeffs_a if b is a else _density_coefficients(b, zn)
    else:
        spec = LatticeSpec(1, zn, s)
        coeffs_a = _axis_coefficients(a, zn, support, breakpoints)
        coeffs_b = coeffs_a if b is a else _axis_coefficients(b, zn, support, breakpoints)
    terms = sobolev_weights(spec) * coeffs_a * np.conj(coeffs_b)
    return math.fsum(terms.real.tolist())


def periodized_density(
    p: NamedDensity | Callable[[np.ndarray], np.ndarray],
    x: float | Sequence[float],
    zn: int,
) -> float:
    """``sum_{||z||_inf <= zn} p(x + 2 pi z)``.

    Plain callables receive the shifted points as a 1-D array in one dimension and
    as an ``(m, D)`` array otherwise.
    """
    if zn < 0:
        raise InvalidParameterError(f"Image count must be non-negative, got {zn}.")
    point = np.atleast_1d(np.asarray(x, dtype=np.float64))
    shifts = 2.0 * math.pi * lattice_array(LatticeSpec(point.shape[0], zn))
    images = point + shifts
    if isinstance(p, NamedDensity):
        values = p.pdf(images)
    elif point.shape[0] == 1:
        values = p(images[:, 0])
    else:
        values = p(images)
    return math.fsum(np.asarray(values, dtype=np.float64).ravel().tolist())


# ---------------------------------------------------------------------------
# Convolution identity for trigonometric polynomials
# ---------------------------------------------------------------------------


def _coefficient_arrays(coeffs: Mapping[MultiIndex, complex]) -> tuple[np.ndarray, np.ndarray]:
    if not coeffs:
        raise InvalidParameterError("A trigonometric polynomial needs at least one coefficient.")
    keys = np.array(list(coeffs), dtype=np.int64)
    if keys.ndim != 2:
        raise InvalidParameterError("Coefficient keys must be integer tuples of one dimension.")
    values = np.array(list(coeffs.values()), dtype=np.complex128)
    return keys, values


def _derivative_factor(keys: np.ndarray, order: int) -> np.ndarray:
    """Multiplier ``prod_j (i k_j)^order`` of ``exp(i <k, x>)`` under ``d^order``."""
    if order == 0:
        return np.ones(keys.shape[0], dtype=np.complex128)
    return np.prod(np.power(1j * keys, order), axis=1)


def _torus_grid(dimension: int, nodes: int) -> np.ndarray:
    axis = -math.pi + 2.0 * math.pi * np.arange(nodes) / nodes
    mesh = np.meshgrid(*([axis] * dimension), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def convolution_identity_residual(
    p_coeffs: Mapping[MultiIndex, complex],
    q_coeffs: Mapping[MultiIndex, complex],
    s: float,
    y: MultiIndex,
    *,
    form: Literal["weighted_derivative", "derivative_product"] = "weighted_derivative",
) -> float:
    """``|LHS - RHS|`` for the weighted convolution of two trigonometric polynomials.

    LHS is the finite sum ``sum_z z^{2s} p~(y - z) q~(z)``. With
    ``p(x) = (2 pi)^-D sum_k p~(k) exp(i <k, x>)``, RHS is a quadrature on the torus of

    * ``weighted_derivative``: ``(-1)^{sD} (2 pi)^D FT[p * d^{2s} q](y)``, exact for every ``y``;
    * ``derivative_product``: ``(2 pi)^D FT[d^s p * d^s q](y)``, which matches only at ``y = 0``.

    ``d^m`` differentiates ``m`` times in every coordinate. The trapezoid rule with
    more nodes than the highest frequency in the integrand is exact.
    """
    if s < 0 or not float(s).is_integer():
        raise UnsupportedOracleError(
            f"The convolution identity is checked for non-negative integer s only, got {s}."
        )
    order = int(s)
    p_keys, p_vals = _coefficient_arrays(p_coeffs)
    q_keys, q_vals = _coefficient_arrays(q_coeffs)
    dimension = p_keys.shape[1]
    target = np.asarray(y, dtype=np.int64)
    if q_keys.shape[1] != dimension or target.shape != (dimension,):
        raise SpecMismatchError("Coefficient maps and y must share one dimension.")
    if form == "derivative_product" and np.any(target):
        raise InvalidParameterError("The derivative-product form holds at y = 0 only.")
    if form not in ("weighted_derivative", "derivative_product"):
        raise InvalidParameterError(f"Unknown form {form!r}.")

    terms = []
    for z, qz in q_coeffs.items():
        pz = p_coeffs.get(tuple(int(t) - int(c) for t, c in zip(target, z, strict=True)), 0)
        terms.append(complex(sobolev_weight(z, order) * pz * qz))
    lhs = complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))

    highest = int(np.abs(p_keys).max() + np.abs(q_keys).max() + np.abs(target).max())
    nodes = 2 * highest + 2
    grid = _torus_grid(dimension, nodes)
    norm = (2.0 * math.pi) ** -dimension
    p_phases = np.exp(1j * grid @ p_keys.T)
    q_phases = np.exp(1j * grid @ q_keys.T)
    if form == "weighted_derivative":
        left = norm * (p_phases @ p_vals)
        right = norm * (q_phases @ (q_vals * _derivative_factor(q_keys, 2 * order)))
        sign = (-1) ** (order * dimension)
    else:
        left = norm * (p_phases @ (p_vals * _derivative_factor(p_keys, order)))
        right = norm * (q_phases @ (q_vals * _derivative_factor(q_keys, order)))
        sign = 1
    integrand = np.exp(-1j * grid @ target) * left * right
    cell = (2.0 * math.pi / nodes) ** dimension
    rhs = sign * (2.0 * math.pi) ** dimension * cell * integrand.sum()
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# Incomplete gamma reference
# ---------------------------------------------------------------------------


def _gamma_series(a: float, x: float, accuracy: float, max_iteration: int) -> float:
    if x == 0.0:
        return 0.0
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(max_iteration):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * accuracy:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise QuadratureError(f"Incomplete gamma series did not converge for a={a}, x={x}.")


def _gamma_continued_fraction(a: float, x: float, accuracy: float, max_iteration: int) -> float:
    """Upper regularised gamma ``Q(a, x)`` by the modified Lentz method."""
    tiny = sys.float_info.min / sys.float_info.epsilon
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, max_iteration + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < accuracy:
            return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h
    raise QuadratureError(
        f"Incomplete gamma continued fraction did not converge for a={a}, x={x}."
    )


def incomplete_gamma_reference(
    a: float, x: float, *, accuracy: float = 1e-15, max_iteration: int = 1000
) -> float:
    """Regularised lower incomplete gamma ``P(a, x)`` without scipy.

    Series for ``x < a + 1``, continued fraction for the complement otherwise.
    """
    if not a > 0:
        raise InvalidParameterError(f"a must be positive, got {a}.")
    if x < 0:
        raise InvalidParameterError(f"x must be non-negative, got {x}.")
    if x < a + 1.0:
        return _gamma_series(a, x, accuracy, max_iteration)
    return 1.0 - _gamma_continued_fraction(a, x, accuracy, max_iteration)


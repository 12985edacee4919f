"""Exact spectra of model spaces and the sphere saturation identity.

Everything here works in :class:`fractions.Fraction` so that identities can
be certified as exactly zero rather than approximately zero.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

__all__ = [
    "ModelSpectrum",
    "sphere_eigenvalue",
    "sphere_multiplicity",
    "gap_index",
    "spectrum_prefix",
    "yang_sides",
    "saturation_sides",
    "verify_sphere_saturation",
    "saturation_summand",
    "saturation_sum",
]

Rational = Union[int, Fraction]


def _check_sphere_args(n: int, level: int, name: str = "level") -> None:
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"sphere dimension must be an integer >= 1, got {n!r}")
    if not isinstance(level, int) or level < 0:
        raise ValueError(f"{name} must be an integer >= 0, got {level!r}")


def sphere_eigenvalue(n: int, level: int) -> Fraction:
    """Eigenvalue ``l(l+n-1)`` of the Laplacian on the unit n-sphere."""
    _check_sphere_args(n, level)
    return Fraction(level * (level + n - 1))


def sphere_multiplicity(n: int, level: int) -> int:
    """Dimension of the space of degree-``level`` spherical harmonics on S^n."""
    _check_sphere_args(n, level)
    lower = math.comb(n + level - 2, n) if level >= 2 else 0
    return math.comb(n + level, n) - lower


def gap_index(n: int, m: int) -> int:
    """Number of eigenvalues in levels ``0..m``, from the closed form.

    The closed form ``((n+2m)/n) * C(n+m-1, m)`` is checked against the
    cumulative multiplicity sum; a mismatch raises ``ArithmeticError``.
    """
    _check_sphere_args(n, m, "m")
    closed = Fraction(n + 2 * m, n) * math.comb(n + m - 1, m)
    cumulative = sum(sphere_multiplicity(n, level) for level in range(m + 1))
    if closed != cumulative:
        raise ArithmeticError(
            f"gap index closed form {closed} != cumulative sum {cumulative} (n={n}, m={m})"
        )
    return int(closed)


@dataclass(frozen=True)
class ModelSpectrum:
    """Exact spectrum of a model space.

    ``kind`` is ``"sphere"`` (unit S^n, ``dim`` = n) or ``"flat_torus"``.
    A flat torus is given by its ``periods``: side length ``j`` equals
    ``2*pi*periods[j]``, which keeps every eigenvalue ``sum (k_j/periods[j])**2``
    rational.
    """

    kind: str
    dim: int | None = None
    periods: tuple[Fraction, ...] = ()

    def __post_init__(self):
        if self.kind == "sphere":
            if not isinstance(self.dim, int) or self.dim < 1:
                raise ValueError("sphere spectrum needs an integer dim >= 1")
        elif self.kind == "flat_torus":
            periods = tuple(Fraction(p) for p in self.periods)
            if not periods or any(p <= 0 for p in periods):
                raise ValueError("flat torus needs positive rational periods")
            object.__setattr__(self, "periods", periods)
            object.__setattr__(self, "dim", len(periods))
        else:
            raise ValueError(f"unknown model space kind {self.kind!r}")

    @classmethod
    def sphere(cls, n: int) -> "ModelSpectrum":
        return cls("sphere", dim=n)

    @classmethod
    def flat_torus(cls, periods: Sequence[Rational]) -> "ModelSpectrum":
        return cls("flat_torus", periods=tuple(Fraction(p) for p in periods))

    def iter_levels(self) -> Iterator[tuple[Fraction, int]]:
        """Yield ``(eigenvalue, multiplicity)`` pairs in increasing order."""
        if self.kind == "sphere":
            for level in itertools.count():
                yield sphere_eigenvalue(self.dim, level), sphere_multiplicity(self.dim, level)
        else:
            yield from _torus_levels(self.periods)


def _torus_values_below(periods: tuple[Fraction, ...], radius: Fraction) -> list[Fraction]:
    """All lattice eigenvalues ``<= radius``, with repetition."""
    # |k_j / p_j| <= sqrt(radius) bounds every coordinate of the ball
    bounds = [math.isqrt(math.ceil(radius * p * p)) + 1 for p in periods]
    values = []
    for k in itertools.product(*(range(-b, b + 1) for b in bounds)):
        value = sum((Fraction(kj) / p) ** 2 for kj, p in zip(k, periods))
        if value <= radius:
            values.append(value)
    values.sort()
    return values


def _torus_levels(periods: tuple[Fraction, ...]) -> Iterator[tuple[Fraction, int]]:
    radius = Fraction(1)
    emitted = Fraction(-1)
    while True:
        # enumeration is complete inside the ball, so every level <= radius is final
        values = _torus_values_below(periods, radius)
        for value, group in itertools.groupby(values):
            if value > emitted:
                yield value, sum(1 for _ in group)
                emitted = value
        radius *= 4


def spectrum_prefix(spectrum: ModelSpectrum, count: int) -> list[Fraction]:
    """First ``count`` eigenvalues, repeated by multiplicity, nondecreasing."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out: list[Fraction] = []
    for value, mult in spectrum.iter_levels():
        out.extend([value] * min(mult, count - len(out)))
        if len(out) >= count:
            return out
    raise AssertionError("unreachable: model spectra are infinite")


def yang_sides(
    eigenvalues: Sequence[Rational], deltas: Sequence[Rational], n: int, k: int
) -> tuple[Fraction, Fraction]:
    """Both sides of ``n sum (L-l_i)^2 <= 4 sum (L-l_i)(l_i + d_i)``, ``L = l_{k+1}``.

    Direct term-by-term summation; this is the oracle the grouped
    computation in :func:`verify_sphere_saturation` is checked against.
    """
    top = Fraction(eigenvalues[k])
    lhs = Fraction(0)
    rhs = Fraction(0)
    for lam, delta in zip(eigenvalues[:k], deltas[:k]):
        gap = top - lam
        lhs += gap * gap
        rhs += gap * (Fraction(lam) + Fraction(delta))
    return n * lhs, 4 * rhs


def saturation_sides(n: int, m: int, g: Rational = 0) -> tuple[Fraction, Fraction]:
    """Exact ``(LHS, RHS)`` of the Yang inequality on S^n at the m-th gap.

    The operator is ``-Laplacian + g|h|^2`` with ``|h|^2 = n^2``: every
    eigenvalue is shifted by ``g n^2`` and ``delta_i = n^2/4 - g n^2``.
    Sums are grouped by sphere level.
    """
    _check_sphere_args(n, m, "m")
    if m < 1:
        raise ValueError("m must be >= 1")
    g = Fraction(g)
    shift = g * n * n
    delta = Fraction(n * n, 4) - shift
    k = gap_index(n, m)
    top = sphere_eigenvalue(n, m + 1) + shift
    lhs = Fraction(0)
    rhs = Fraction(0)
    count = 0
    for level in range(m + 1):
        lam = sphere_eigenvalue(n, level) + shift
        mult = sphere_multiplicity(n, level)
        gap = top - lam
        lhs += mult * gap * gap
        rhs += mult * gap * (lam + delta)
        count += mult
    assert count == k
    return n * lhs, 4 * rhs


def verify_sphere_saturation(n: int, m: int, g: Rational = 0) -> Fraction:
    """Exact residual ``RHS - LHS`` of :func:`saturation_sides`; always 0."""
    lhs, rhs = saturation_sides(n, m, g)
    return rhs - lhs


def saturation_summand(n: int, m: int, level: int) -> Fraction:
    """Contribution of sphere level ``level`` to ``(n-1)! * (RHS - LHS)``.

    Closed form
    ``(m-l+1)(n+m+l)(2l+n-1)(4l(l-1) - n^2(m-l) - n(m^2+m-l(l+3))) (n+l-2)!/l!``.
    Level 0 is included: for n >= 2 the same formula applies, and for n = 1
    the factor ``(2l+n-1)(n+l-2)!/l!`` is read as ``(n-1)! * mult = 1``.
    """
    _check_sphere_args(n, m, "m")
    if not 0 <= level <= m:
        raise ValueError(f"level must lie in [0, m], got {level}")
    l = level
    poly = (m - l + 1) * (n + m + l) * (4 * l * (l - 1) - n * n * (m - l) - n * (m * m + m - l * (l + 3)))
    if n + l - 2 < 0:
        weight = Fraction(1)
    else:
        weight = Fraction((2 * l + n - 1) * math.factorial(n + l - 2), math.factorial(l))
    return poly * weight


def saturation_sum(n: int, m: int, start: int = 0) -> Fraction:
    """Sum of :func:`saturation_summand` over levels ``start..m``."""
    return sum((saturation_summand(n, m, l) for l in range(start, m + 1)), Fraction(0))


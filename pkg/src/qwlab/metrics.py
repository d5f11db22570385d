"""Probability metrics between CDFs and characteristic-function bounds.

Handles two kinds of CDF: step functions (:class:`qwlab.walk.StepCDF`) and
continuous evaluators (any callable with a ``support`` attribute, e.g.
:class:`qwlab.konno.KonnoCDF`).  The Kolmogorov distance and the Levy-metric
feasibility functionals are evaluated exactly on candidate sets derived from
the jump points whenever a step CDF is involved; purely continuous pairs fall
back to certified monotone bracketing on an adaptive grid.

Also implements the triangular smoothing family used to regularize CDFs, its
convolution with step CDFs, and an Esseen/Zolotarev-type upper bound on the
Levy metric built from weighted suprema of characteristic-function
differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .walk import StepCDF


class ContinuousPairWithoutGrid(Exception):
    """Kolmogorov distance of two continuous CDFs needs an evaluation grid."""


class PreconditionViolation(Exception):
    """A quantitative hypothesis of a transfer inequality fails."""


def _is_step(f) -> bool:
    return isinstance(f, StepCDF)


# ---------------------------------------------------------------------------
# Kolmogorov metric
# ---------------------------------------------------------------------------


def kolmogorov(F, G, grid=None, interval=None) -> float:
    """sup |F - G|, exact when at least one argument is a step CDF.

    For step vs continuous the supremum is attained at a jump point of the
    step argument (using both one-sided values), because the difference is
    monotone between jumps.  For step vs step the union of jump points is
    used.  Two continuous arguments require an explicit ``grid``.  With
    ``interval=(lo, hi)`` the supremum is restricted to that closed interval.
    """
    if _is_step(F) and _is_step(G):
        xs = np.union1d(F.jump_points, G.jump_points)
        cands = [
            np.abs(F.value_at(xs) - G.value_at(xs)),
            np.abs(F.left_limit_at(xs) - G.left_limit_at(xs)),
        ]
    elif _is_step(F) or _is_step(G):
        S, C = (F, G) if _is_step(F) else (G, F)
        xs = S.jump_points
        cv = np.asarray(C(xs))
        cands = [np.abs(S.value_at(xs) - cv), np.abs(S.left_limit_at(xs) - cv)]
    else:
        if grid is None:
            raise ContinuousPairWithoutGrid(
                "two continuous CDFs need an explicit evaluation grid"
            )
        xs = np.asarray(grid, dtype=float)
        cands = [np.abs(np.asarray(F(xs)) - np.asarray(G(xs)))]

    if interval is not None:
        lo, hi = interval
        mask = (xs >= lo) & (xs <= hi)
        ends = []
        for x in (lo, hi):
            fv = F.value_at(x) if _is_step(F) else float(F(x))
            gv = G.value_at(x) if _is_step(G) else float(G(x))
            ends.append(abs(fv - gv))
        inner = max(float(c[mask].max()) for c in cands) if mask.any() else 0.0
        return max(inner, *ends)
    return float(max(c.max() for c in cands))


# ---------------------------------------------------------------------------
# Levy metric
# ---------------------------------------------------------------------------


def _eval_value(f, x):
    return f.value_at(x) if _is_step(f) else np.asarray(f(x))


def _sup_shifted_diff_step(G, F, eps: float) -> float:
    """Exact sup_x [G(x) - F(x + eps)] when a step CDF is involved."""
    best = 0.0  # the x -> +inf limit of the difference is 0
    if _is_step(F):
        # Between down-jumps of F(.+eps) the difference increases; candidates
        # are the left limits at those jumps.
        xs = F.jump_points
        best = max(
            best,
            float(np.max(_eval_left(G, xs - eps) - F.left_limit_at(xs))),
        )
    if _is_step(G):
        # Right after an up-jump of G; on [g_m, g_{m+1}) the difference
        # decreases, so the left endpoint dominates.
        xs = G.jump_points
        best = max(best, float(np.max(G.value_at(xs) - _eval_value(F, xs + eps))))
    return best


def _cont_diff_exceeds(G, F, eps: float, threshold: float, tol: float) -> bool:
    """Decide sup_x [G(x) - F(x + eps)] > threshold for continuous G, F.

    Monotonicity sandwiches each grid cell [t_m, t_{m+1}] by
    G(t_{m+1}) - F(t_m + eps) from above and the endpoint values from
    below; only cells straddling the threshold get refined, so a clear-cut
    decision costs one pass.  Near-boundary answers may be off by tol/2.
    """
    lo = min(G.support[0], F.support[0] - eps) - tol
    hi = max(G.support[1], F.support[1] - eps) + tol
    left = np.linspace(lo, hi, 1025)[:-1]
    width = (hi - lo) / 1024.0
    g_l = np.asarray(G(left))
    f_l = np.asarray(F(left + eps))
    g_r = np.asarray(G(left + width))
    f_r = np.asarray(F(left + width + eps))
    widths = np.full_like(left, width)
    for _ in range(80):
        if np.max(g_l - f_l) > threshold or np.max(g_r - f_r) > threshold:
            return True
        upper = g_r - f_l
        active = upper > threshold + tol / 2
        if not active.any():
            return False
        # split the straddling cells at their midpoints
        l, w = left[active], widths[active] / 2.0
        mid = l + w
        g_m = np.asarray(G(mid))
        f_m = np.asarray(F(mid + eps))
        left = np.concatenate([l, mid])
        widths = np.concatenate([w, w])
        g_l = np.concatenate([g_l[active], g_m])
        f_l = np.concatenate([f_l[active], f_m])
        g_r = np.concatenate([g_m, g_r[active]])
        f_r = np.concatenate([f_m, f_r[active]])
    return bool(np.max(g_r - f_l) > threshold + tol / 2)


def _eval_left(f, x):
    if _is_step(f):
        return f.left_limit_at(x)
    return np.asarray(f(x))  # continuous: left limit equals the value


def levy(F, G, tol: float = 1e-9) -> float:
    """Levy metric L(F, G) by bisection over the slack parameter.

    A slack eps is feasible when sup_x [G(x) - F(x+eps)] <= eps and
    sup_x [F(x-eps) - G(x)] <= eps; both suprema are evaluated exactly at
    jump-derived candidates (shifted by +-eps, with one-sided limits) when a
    step argument is present.  Feasibility is monotone in eps, so bisection
    returns the metric within tol.  Always at most 1.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    stepwise = _is_step(F) or _is_step(G)

    def feasible(eps: float) -> bool:
        # sup_x [F(x-eps) - G(x)] equals sup_y [F(y) - G(y+eps)]
        if stepwise:
            return (
                _sup_shifted_diff_step(G, F, eps) <= eps
                and _sup_shifted_diff_step(F, G, eps) <= eps
            )
        return not _cont_diff_exceeds(G, F, eps, eps, tol) and not _cont_diff_exceeds(
            F, G, eps, eps, tol
        )

    lo, hi = 0.0, 1.0
    if feasible(0.0):
        return 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# Smoothing family
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _irwin_hall_binoms(m: int):
    return tuple(math.comb(m, j) for j in range(m + 1))


def _irwin_hall_cdf(s, m: int):
    """CDF of the sum of m iid U[0,1] variables (piecewise degree-m polynomial).

    Evaluated by the alternating finite-difference sum; arguments above m/2
    use the symmetry F(s) = 1 - F(m - s) to keep the cancellation bounded.
    Double precision holds this to ~1e-12 for m <= 12.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.empty_like(s)
    lowhalf = s <= m / 2.0
    for mask, arg, flip in ((lowhalf, s, False), (~lowhalf, m - s, True)):
        if not mask.any():
            continue
        t = np.clip(arg[mask], 0.0, m)
        acc = np.zeros_like(t)
        binoms = _irwin_hall_binoms(m)
        for j in range(m + 1):
            term = binoms[j] * np.where(t > j, (t - j) ** m, 0.0)
            acc += term if j % 2 == 0 else -term
        vals = acc / math.factorial(m)
        out[mask] = 1.0 - vals if flip else vals
    return out


@dataclass(frozen=True)
class SmoothingFamily:
    """Sum of ``order`` iid triangular variables on [-eps/2order, eps/2order].

    The total is supported on [-eps/2, eps/2] with a continuous piecewise
    polynomial density of degree 2*order - 1.
    """

    eps: float
    order: int = 3

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.order < 1:
            raise ValueError("order must be at least 1")

    def cdf(self, x):
        """CDF of the triangular sum, exact piecewise polynomial.

        A triangle on [-h, h] is the sum of two uniforms on [-h/2, h/2], so
        the order-n family is an Irwin-Hall sum of 2n uniforms, rescaled.
        """
        h = self.eps / (2.0 * self.order)
        vals = _irwin_hall_cdf(np.asarray(x, dtype=float) / h + self.order, 2 * self.order)
        return vals if np.ndim(x) else float(vals[0])

    def char_fn(self, lam):
        """(sin(eps lam / 2n) / (eps lam / 2n))^n with the lam=0 limit 1.

        This is the transform of the sum of ``order`` uniforms on
        [-eps/2order, eps/2order]: the same [-eps/2, eps/2] support envelope
        and lam^{-order} decay, used as the weight in the smoothing bound.
        """
        lam = np.asarray(lam, dtype=float)
        x = self.eps * lam / (2.0 * self.order)
        out = np.where(x == 0.0, 1.0, np.divide(np.sin(x), np.where(x == 0.0, 1.0, x)))
        out = out**self.order
        return out if np.ndim(lam) else float(out)


class ConvolvedCDF:
    """Continuous CDF F * Theta for a step F: sum_i dF_i Theta(x - x_i)."""

    def __init__(self, F: StepCDF, fam: SmoothingFamily):
        self._jumps = F.jump_points
        self._masses = F.jump_masses()
        self._fam = fam
        self.support = (
            float(F.jump_points[0] - fam.eps / 2),
            float(F.jump_points[-1] + fam.eps / 2),
        )

    def __call__(self, x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(len(xs))
        chunk = max(1, int(2**20) // max(len(self._jumps), 1))
        for s in range(0, len(xs), chunk):
            block = xs[s : s + chunk, None] - self._jumps[None, :]
            out[s : s + chunk] = self._fam.cdf(block) @ self._masses
        return out if np.ndim(x) else float(out[0])


def convolve(F: StepCDF, fam: SmoothingFamily) -> ConvolvedCDF:
    """Convolution of a step CDF with the smoothing family (exact)."""
    if not _is_step(F):
        raise TypeError("convolve expects a step CDF as first argument")
    return ConvolvedCDF(F, fam)


# ---------------------------------------------------------------------------
# Esseen/Zolotarev-type bound
# ---------------------------------------------------------------------------


def _zolotarev_constant() -> float:
    """C = int_0^inf |theta_hat(lam) / (psi_1(lam) lam)| dlam for order 3.

    With the order-3 sinc weight, the integrand is |sinc(lam/6)|^3 on (0, 1]
    and lam |sinc(lam/6)|^3 beyond.  The tail decays like 1/lam^2 only, so
    it is summed per half-period of the sine up to 1e5*pi and closed with
    the mean-value tail (4/3pi) * 36 / U; absolute accuracy ~1e-10.
    """
    nodes, weights = np.polynomial.legendre.leggauss(20)

    def sinc3(u):
        return np.abs(np.sin(u) / u) ** 3

    # int_0^1 |sinc(lam/6)|^3 dlam
    mid = 0.5 * (nodes + 1.0)
    head = float(np.sum(0.5 * weights * sinc3(np.where(mid == 0, 1e-300, mid) / 6.0)))

    # int_1^inf lam |sinc(lam/6)|^3 dlam = 36 int_{1/6}^inf |sin u|^3 / u^2 du
    kmax = 100_000
    edges = np.concatenate(([1.0 / 6.0], np.arange(1, kmax + 1) * np.pi))
    a, b = edges[:-1], edges[1:]
    u = 0.5 * (b + a)[:, None] + 0.5 * (b - a)[:, None] * nodes[None, :]
    integrand = np.abs(np.sin(u)) ** 3 / (u * u)
    body = float(np.sum((0.5 * (b - a))[:, None] * weights[None, :] * integrand))
    tail = 4.0 / (3.0 * np.pi * edges[-1])
    return head + 36.0 * (body + tail)


@dataclass(frozen=True)
class ZolotarevWeights:
    """The universal constant of the smoothing bound, computed once."""

    constant_c: float

    @classmethod
    def compute(cls) -> "ZolotarevWeights":
        c = _zolotarev_constant()
        if not (0.0 < c < np.inf):
            raise ValueError("smoothing-bound constant must be positive and finite")
        return cls(constant_c=c)


_SMALL_GRID = np.logspace(-4, 0, 10_000)
_LARGE_GRID = np.logspace(0, 5, 2_001)[1:]  # (1, 1e5]
_LAM_TRUST = 600.0  # |delta| <= 2 caps the weighted tail beyond this


@lru_cache(maxsize=1)
def default_weights() -> "ZolotarevWeights":
    return ZolotarevWeights.compute()


def zolotarev_bound(char_f, char_g, eps: float, zw: ZolotarevWeights) -> float:
    """eps + eps^{-2} C max(sup_{lam<=1} |delta/lam|, sup_{lam>1} |delta/lam^2|).

    ``char_f`` and ``char_g`` must accept arrays of frequencies.  The small
    supremum is sampled on a 1e4-point log grid over (0, 1], the large one
    over (1, 1e5]; beyond the grid (and wherever quadrature resolution is
    doubtful, above ~600) the bound |delta| <= 2 caps the weighted term, and
    that cap is folded into the maximum so the result stays a valid upper
    bound for the Levy metric.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    d_small = np.abs(np.asarray(char_f(_SMALL_GRID)) - np.asarray(char_g(_SMALL_GRID)))
    sup_small = float(np.max(d_small / _SMALL_GRID))
    d_large = np.abs(np.asarray(char_f(_LARGE_GRID)) - np.asarray(char_g(_LARGE_GRID)))
    sup_large = float(np.max(d_large / _LARGE_GRID**2))
    sup_large = max(sup_large, 2.0 / _LAM_TRUST**2)
    return eps + zw.constant_c / (eps * eps) * max(sup_small, sup_large)


# ---------------------------------------------------------------------------
# Smooth-region transfer
# ---------------------------------------------------------------------------


def smooth_region_transfer(F, G, interval, g_prime_sup: float, levy_value: float) -> float:
    """Upper bound (1 + sup_I |G'|) L(F, G) for sup_I |F - G|.

    Valid when G is continuously differentiable on an open region containing
    ``interval`` with margin larger than the Levy distance; ``G.support`` is
    taken as that region.  Raises PreconditionViolation when the margin
    condition fails.
    """
    lo, hi = interval
    slo, shi = G.support
    margin = min(lo - slo, shi - hi)
    if not margin > levy_value:
        raise PreconditionViolation(
            f"Levy value {levy_value:.3e} is not below the interval margin {margin:.3e}"
        )
    return (1.0 + g_prime_sup) * levy_value

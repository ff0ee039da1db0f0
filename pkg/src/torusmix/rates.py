"""Decay fits, model selection, tail exponents and rate-transfer formulas."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

__all__ = [
    "DecayFit",
    "Classification",
    "TailEstimate",
    "fit_decay",
    "classify_decay",
    "tail_exponent",
    "interpolated_rate",
    "interpolation_exponents",
    "annealed_rate_from_quenched",
    "annealed_transfer_exponents",
    "birkhoff_growth_exponent",
    "SELECTION_MARGIN",
]

SELECTION_MARGIN = 0.02
MIN_POINTS = 5
# a series counts as vanishing only after this many trailing exact zeros (isolated parity zeros are common)
TRAILING_ZEROS = 3


@dataclass(frozen=True)
class DecayFit:
    """Least-squares decay model.

    ``exponential``: ``|c_N| ~ prefactor * exp(-rate N)``.
    ``polynomial``: ``|c_N| ~ prefactor * N**exponent`` (``exponent < 0`` for decay).
    """

    model: str
    rate: float | None
    exponent: float | None
    prefactor: float
    r2: float
    window: tuple
    slope_ci: tuple
    n_points: int
    zeros_dropped: int
    vanishes_from: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def verdict(self) -> str:
        lo, hi = self.slope_ci
        if self.model == "exponential":
            return f"exponential decay, rate {self.rate:.4g} (95% CI [{-hi:.4g}, {-lo:.4g}]), R^2 = {self.r2:.3f}"
        if self.model == "polynomial":
            return f"polynomial decay, exponent {self.exponent:.4g} (95% CI [{lo:.4g}, {hi:.4g}]), R^2 = {self.r2:.3f}"
        return f"no decay model, R^2 = {self.r2:.3f}"


def _unpack(series):
    """``(N, |values|)`` from a correlation series or a pair of sequences."""
    if hasattr(series, "N") and hasattr(series, "values"):
        N, vals = series.N, series.values
    else:
        N, vals = series
    N = np.asarray(N, dtype=float)
    mags = np.abs(np.asarray(vals, dtype=complex))
    if N.shape != mags.shape:
        raise ValueError("N and values differ in length")
    return N, mags


def _linfit(x, y):
    res = stats.linregress(x, y)
    n = len(x)
    r2 = float(res.rvalue**2) if np.isfinite(res.rvalue) else 0.0
    if n > 2 and np.isfinite(res.stderr):
        t = stats.t.ppf(0.975, n - 2)
        ci = (float(res.slope - t * res.stderr), float(res.slope + t * res.stderr))
    else:
        ci = (float(res.slope), float(res.slope))
    return float(res.slope), float(res.intercept), min(max(r2, 0.0), 1.0), ci


def fit_decay(series, model: str = "exponential") -> DecayFit:
    """Fit an exponential or polynomial decay law to ``|values|``.

    Exact zeros are excluded.  When the series ends in at least ``TRAILING_ZEROS``
    exact zeros, only the window before that point is fitted and ``vanishes_from``
    records the first vanishing ``N``.
    """
    if model not in ("exponential", "polynomial"):
        raise ValueError(f"unknown model {model!r}")
    N, mags = _unpack(series)
    nz = np.nonzero(mags > 0)[0]
    vanishes_from = None
    if nz.size and len(mags) - 1 - nz[-1] >= TRAILING_ZEROS:
        vanishes_from = int(N[nz[-1] + 1])
    keep = mags > 0
    zeros = int(np.sum(~keep))
    x, y = N[keep], np.log(mags[keep])
    if model == "polynomial":
        if np.any(x <= 0):
            keep_pos = x > 0
            zeros += int(np.sum(~keep_pos))
            x, y = x[keep_pos], y[keep_pos]
        x = np.log(x)
    if len(x) < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} nonzero points, got {len(x)}")
    slope, intercept, r2, ci = _linfit(x, y)
    window = (float(np.exp(x[0]) if model == "polynomial" else x[0]), float(np.exp(x[-1]) if model == "polynomial" else x[-1]))
    if model == "exponential":
        return DecayFit(model, -slope, None, math.exp(intercept), r2, window, ci, len(x), zeros, vanishes_from)
    return DecayFit(model, None, slope, math.exp(intercept), r2, window, ci, len(x), zeros, vanishes_from)


@dataclass(frozen=True)
class Classification:
    tag: str
    exponential: DecayFit | None
    polynomial: DecayFit | None
    ambiguous: bool
    eventually_zero: bool

    def best(self) -> DecayFit | None:
        return {"exponential": self.exponential, "polynomial": self.polynomial}.get(self.tag)

    def to_dict(self) -> dict:
        return {
            "tag": self.tag,
            "ambiguous": self.ambiguous,
            "eventually_zero": self.eventually_zero,
            "exponential": None if self.exponential is None else self.exponential.to_dict(),
            "polynomial": None if self.polynomial is None else self.polynomial.to_dict(),
        }

    def verdict(self) -> str:
        if self.eventually_zero and self.tag == "exponential":
            return "exactly zero from N = %d on (faster than any exponential)" % self.exponential.vanishes_from
        best = self.best()
        line = best.verdict() if best is not None else "no decay detected"
        return line + (" [ambiguous]" if self.ambiguous else "")


def classify_decay(series, margin: float = SELECTION_MARGIN) -> Classification:
    """Pick exponential vs polynomial decay by R^2 with a selection margin.

    Tag ``"none"`` when the series does not decrease or the best R^2 is below
    0.5.  When the two R^2 values are within ``margin`` the better one is still
    tagged but ``ambiguous`` is set.  A series ending in at least ``TRAILING_ZEROS`` exact zeros is
    tagged exponential with ``eventually_zero`` set.
    """
    N, mags = _unpack(series)
    nz = np.nonzero(mags > 0)[0]
    eventually_zero = bool(nz.size) and len(mags) - 1 - nz[-1] >= TRAILING_ZEROS
    fits = {}
    for model in ("exponential", "polynomial"):
        try:
            fits[model] = fit_decay((N, mags), model)
        except ValueError:
            fits[model] = None
    exp_fit, pol_fit = fits["exponential"], fits["polynomial"]
    if eventually_zero:
        return Classification("exponential", exp_fit, pol_fit, False, True)
    if exp_fit is None and pol_fit is None:
        raise ValueError(f"need at least {MIN_POINTS} nonzero points")
    pos = mags[mags > 0]
    decreasing = pos.size >= 2 and pos[-1] < pos[0] and (exp_fit is None or exp_fit.rate > 0)
    r2e = exp_fit.r2 if exp_fit else -1.0
    r2p = pol_fit.r2 if pol_fit else -1.0
    if not decreasing or max(r2e, r2p) < 0.5:
        return Classification("none", exp_fit, pol_fit, False, False)
    tag = "exponential" if r2e >= r2p else "polynomial"
    return Classification(tag, exp_fit, pol_fit, abs(r2e - r2p) < margin, False)


@dataclass(frozen=True)
class TailEstimate:
    """Power-tail exponent ``kappa`` with ``P(C > c) ~ c**-kappa``."""

    kappa: float
    ci: tuple
    quantile: float
    n_tail: int
    r2: float

    def to_dict(self) -> dict:
        return asdict(self)


def _survival_slope(x_sorted_desc):
    n = len(x_sorted_desc)
    surv = np.arange(1, n + 1) / n
    return stats.linregress(np.log(x_sorted_desc), np.log(surv))


def tail_exponent(samples, *, top: float = 0.2, n_boot: int = 200, seed: int = 0, min_samples: int = 100) -> TailEstimate:
    """Regression of ``log`` empirical survival on ``log`` value over the top quantile.

    The confidence interval is a percentile bootstrap.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < min_samples:
        raise ValueError(f"need at least {min_samples} samples")
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("samples must be positive and finite")
    k = max(int(round(top * x.size)), 10)

    def estimate(arr):
        desc = np.sort(arr)[::-1]
        tail = desc[:k]
        if tail[0] == tail[-1]:
            raise ValueError("degenerate samples: the tail is constant")
        res = _survival_slope(tail)
        return -res.slope, res.rvalue**2

    kappa, r2 = estimate(x)
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_boot):
        try:
            boots.append(estimate(rng.choice(x, size=x.size, replace=True))[0])
        except ValueError:
            continue
    ci = tuple(np.percentile(boots, [2.5, 97.5]).tolist()) if boots else (kappa, kappa)
    return TailEstimate(float(kappa), ci, top, k, float(r2))


def interpolated_rate(alpha: float, s0: float, s: float) -> float:
    """Mixing rate in the weaker norm of order ``s`` from rate ``alpha`` in order ``s0``.

    Equal to ``alpha / (2 s0 / s - 1)``; requires ``s < 2 s0``.
    """
    if alpha <= 0 or s0 <= 0 or s <= 0:
        raise ValueError("alpha, s0 and s must be positive")
    if s >= 2 * s0:
        raise ValueError("the interpolated rate is only positive for s < 2 s0")
    return alpha / (2 * s0 / s - 1)


def interpolation_exponents(alpha: float, s0: float, s: float, beta):
    """The two decay exponents ``(s beta, alpha - 2 (s0 - s) beta)`` obtained with cutoff ``e^{beta n}``."""
    beta = np.asarray(beta, dtype=float)
    return s * beta, alpha - 2 * (s0 - s) * beta


def annealed_rate_from_quenched(alpha: float, kappa: float) -> tuple:
    """``(alpha kappa / (1 + kappa), alpha / (1 + kappa))``: annealed rate and optimal split ``beta``."""
    if alpha <= 0 or kappa <= 0:
        raise ValueError("alpha and kappa must be positive")
    return alpha * kappa / (1 + kappa), alpha / (1 + kappa)


def annealed_transfer_exponents(alpha: float, kappa: float, beta):
    """``(alpha - beta, kappa beta)``: the good-event and bad-event exponents for split ``beta``."""
    beta = np.asarray(beta, dtype=float)
    return alpha - beta, kappa * beta


def birkhoff_growth_exponent(N, magnitudes) -> tuple:
    """Slope and 95% CI of ``log |S_N|`` against ``log N``."""
    N = np.asarray(N, dtype=float)
    m = np.asarray(magnitudes, dtype=float)
    if len(N) < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} points")
    if np.any(m <= 0) or np.any(N <= 0):
        raise ValueError("magnitudes and N must be positive")
    slope, _, _, ci = _linfit(np.log(N), np.log(m))
    return slope, ci

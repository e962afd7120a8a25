"""Large-time heat traces and their power-law decay exponents.

theta_p(t) integrates tr exp(-t Delta_p(k)) against the Plancherel weight |k|^n
over the real line; the k < 0 half equals the k > 0 half, so everything is
2 * int_0^inf.  The volume prefactor is dropped since only the exponent matters.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate

from . import catalog
from . import dgroup
from . import heisenberg as hz


class QuadratureError(RuntimeError):
    pass


class FitError(ValueError):
    pass


MODES = ("lowest_band", "full_trace")


@dataclass
class HeatTraceConfig:
    t_grid: np.ndarray = field(default_factory=lambda: np.logspace(2, 5, 25))
    quad_tol: float = 1e-11
    eps_tail: float = 1e-9
    mode: str = "lowest_band"
    s_max: int = 4000
    workers: int = 1

    def __post_init__(self):
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        if self.t_grid.ndim != 1 or len(self.t_grid) == 0:
            raise ValueError("t_grid must be a non-empty 1-d array")
        if np.any(self.t_grid <= 0) or np.any(np.diff(self.t_grid) <= 0):
            raise ValueError("t_grid must be positive and strictly increasing")
        if not 0 < self.eps_tail <= 1e-6:
            raise ValueError("eps_tail must lie in (0, 1e-6]")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.s_max < 4:
            raise ValueError("s_max must be at least 4")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["t_grid"] = [float(t) for t in self.t_grid]
        return d


# quadrature

def _edges(t: float, a: float) -> list[float]:
    """Breakpoints that resolve both the 1/t (linear) and 1/sqrt(t) (quadratic) scales."""
    scale = 1.0 / (t * a) if a > 0 else 1.0 / math.sqrt(t)
    top = min(60.0 / (t * a) if a > 0 else math.inf, 12.0 / math.sqrt(t))
    top = max(top, scale)
    out = [0.0]
    x = min(scale, 1.0 / t) / 16
    while x < top:
        out.append(x)
        x *= 2
    out.append(top)
    return out


def integrate_positive(f, t: float, a: float, tol: float = 1e-11) -> float:
    """int_0^inf f(k) dk for an integrand concentrated on the scale set by t and a."""
    edges = _edges(t, a)
    total = 0.0
    err_total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err, *_ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=tol, limit=200, full_output=1)
        total += val
        err_total += err
    if err_total > 1e3 * tol * abs(total):
        raise QuadratureError(f"quadrature error {err_total:.3g} too large at t={t}")
    # beyond the last edge the integrand is below exp(-60) of its peak
    if not np.isfinite(total) or total <= 0:
        raise QuadratureError(f"quadrature failed at t={t}")
    return total


def laplace_integral(m: int, a: float, t: float, tol: float = 1e-12) -> float:
    """int_0^inf k^m exp(-t(a k + k^2)) dk."""
    if m < 0 or a < 0 or t <= 0:
        raise ValueError("need m >= 0, a >= 0 and t > 0")
    return integrate_positive(lambda k: k ** m * math.exp(-t * (a * k + k * k)), t, a, tol)


# lowest band

def lowest_band(n: int, p: int, t: float, tol: float = 1e-11) -> float:
    """2 C(n,p) int_0^inf k^n exp(-t(k^2 + (n-p)k)) dk, with degrees above n reflected."""
    if t <= 0:
        raise ValueError("t must be positive")
    q = catalog.reflect_degree(n, p)
    return 2 * math.comb(n, q) * laplace_integral(n, n - q, t, tol)


# full trace

class ShellTable:
    """Block Laplacian parts grouped by shell |gamma| and stacked by block size."""

    def __init__(self, n: int, p: int):
        self.n, self.p = n, p
        self.s_min = -min(p, n)
        self._chunks: dict[tuple, list] = {}

    def shell(self, s: int) -> list[dict]:
        gammas = hz.enumerate_gammas(self.n, self.p, s, gamma_min=s)
        return [hz.block_parts(self.n, self.p, g) for g in gammas]

    def chunk(self, s0: int, s1: int) -> list:
        """[(shell_offsets, {e: stacked}), ...] for shells s0..s1-1, one entry per block size."""
        key = (s0, s1)
        if key not in self._chunks:
            groups: dict[int, tuple[list, dict]] = {}
            for s in range(s0, s1):
                for parts in self.shell(s):
                    d = next(iter(parts.values())).shape[0]
                    idx, stack = groups.setdefault(d, ([], {}))
                    idx.append(s - s0)
                    for e, M in parts.items():
                        stack.setdefault(e, []).append(M)
            self._chunks[key] = [(np.array(idx), {e: np.array(v) for e, v in stack.items()})
                                 for idx, stack in groups.values()]
        return self._chunks[key]

    def shell_traces(self, k: float, t: float, s0: int, s1: int) -> np.ndarray:
        out = np.zeros(s1 - s0)
        for idx, stack in self.chunk(s0, s1):
            M = sum(k ** (e / 2) * A for e, A in stack.items())
            vals = np.linalg.eigvalsh(M)
            np.add.at(out, idx, np.exp(-t * vals).sum(axis=1))
        return out


_TABLES: dict[tuple, ShellTable] = {}


def shell_table(n: int, p: int) -> ShellTable:
    key = (n, p)
    if key not in _TABLES:
        _TABLES[key] = ShellTable(n, p)
    return _TABLES[key]


CHUNK = 32


def block_trace(n: int, p: int, k: float, t: float, eps_tail: float = 1e-9, s_max: int = 4000) -> float:
    """sum over all blocks of tr exp(-t Delta_p(k)), shells added until they fall below eps_tail.

    Past ``s_max`` the remaining shells are summed as a geometric series with
    the ratio of the last two shells.
    """
    table = shell_table(n, p)
    total = 0.0
    s = table.s_min
    last = []
    size = CHUNK
    while True:
        s1 = min(s + size, table.s_min + s_max)
        size *= 2
        tr = table.shell_traces(k, t, s, s1)
        for c in tr:
            total += c
            last.append(c)
        s = s1
        if tr[-1] < eps_tail * total and tr[-1] <= tr[-2]:
            return total
        if s >= table.s_min + s_max:
            q = last[-1] / last[-2] if last[-2] > 0 else 0.0
            if not q < 1:
                raise QuadratureError(f"shell sum does not converge at k={k}, t={t}")
            return total + last[-1] * q / (1 - q)


def full_trace(n: int, p: int, t: float, tol: float = 1e-7, eps_tail: float = 1e-9, s_max: int = 4000) -> float:
    """2 int_0^inf sum_blocks tr exp(-t Delta_p(k)) k^n dk."""
    if t <= 0:
        raise ValueError("t must be positive")
    q = catalog.reflect_degree(n, p)

    def f(k):
        if k == 0:
            return 0.0
        return block_trace(n, q, k, t, eps_tail, s_max) * k ** n

    return 2 * integrate_positive(f, t, n - q, tol)


def trace_at(n: int, p: int, t: float, config: HeatTraceConfig | None = None) -> float:
    config = config or HeatTraceConfig()
    if config.mode == "lowest_band":
        return lowest_band(n, p, t, config.quad_tol)
    return full_trace(n, p, t, max(config.quad_tol, 1e-7), config.eps_tail, config.s_max)


def _trace_job(args):
    n, p, t, config = args
    return trace_at(n, p, t, config)


def trace_series(n: int, p: int, config: HeatTraceConfig | None = None) -> np.ndarray:
    config = config or HeatTraceConfig()
    jobs = [(n, p, float(t), config) for t in config.t_grid]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as ex:
            return np.array(list(ex.map(_trace_job, jobs)))
    return np.array([_trace_job(j) for j in jobs])


# D group

ENDPOINTS = ("lower", "upper", "midpoint")


def dgroup_coefficient(n: int, endpoint: str) -> float:
    lo, hi = dgroup.bracket_coefficients(n)
    if endpoint == "lower":
        return lo
    if endpoint == "upper":
        return hi
    if endpoint == "midpoint":
        return (lo + hi) / 2
    raise ValueError(f"endpoint must be one of {ENDPOINTS}")


def dgroup_trace_at(n: int, t: float, endpoint: str = "midpoint", multiplicity: int = 1,
                    tol: float = 1e-11) -> float:
    """2 pi int_0^inf r^{2n+1} exp(-t(a r + r^2)) dr with a from the lowest-eigenvalue bracket."""
    if t <= 0:
        raise ValueError("t must be positive")
    if n < 1:
        raise ValueError("n must be positive")
    a = dgroup_coefficient(n, endpoint)
    return 2 * math.pi * multiplicity * laplace_integral(2 * n + 1, a, t, tol)


# asymptotics of the Laplace integral

@dataclass
class LaplaceRow:
    m: int
    a: float
    T: float
    integral: float
    ratio: float
    ratio_literal: float


def laplace_asymptotics_check(m: int, a: float, T_list) -> list[LaplaceRow]:
    """integral * (aT)^{m+1} / m! for each T; ``ratio_literal`` omits the m!.

    Both tend to their limits with relative correction about (m+1)(m+2)/(a^2 T).
    """
    if a <= 0:
        raise ValueError("a must be positive")
    rows = []
    for T in T_list:
        I = laplace_integral(m, a, float(T))
        lit = I * (a * T) ** (m + 1)
        rows.append(LaplaceRow(m, a, float(T), I, lit / math.factorial(m), lit))
    return rows


def quadratic_slope(m: int, T_list) -> float:
    """Fitted d log I / d log T for I(T) = int_0^inf k^m exp(-T k^2) dk; the exact value is -(m+1)/2."""
    T = np.asarray(T_list, dtype=float)
    I = np.array([laplace_integral(m, 0.0, t) for t in T])
    return float(np.polyfit(np.log(T), np.log(I), 1)[0])


# exponent fitting

@dataclass
class NSEstimate:
    alpha_hat: float
    stderr: float
    alpha_closed: float | None
    window: tuple
    samples: int
    t: np.ndarray = field(repr=False)
    slope: np.ndarray = field(repr=False)

    @property
    def relative_error(self) -> float | None:
        if self.alpha_closed is None:
            return None
        return abs(self.alpha_hat - self.alpha_closed) / self.alpha_closed

    def summary(self, config: dict | None = None) -> dict:
        return {
            "alpha_hat": self.alpha_hat,
            "stderr": self.stderr,
            "alpha_closed": self.alpha_closed,
            "window": list(self.window),
            "samples": self.samples,
            "config": config or {},
        }


def local_slopes(t, theta) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference -d log theta / d log t at the interior grid points."""
    lt, lth = np.log(t), np.log(theta)
    s = -(lth[2:] - lth[:-2]) / (lt[2:] - lt[:-2])
    return np.asarray(t)[1:-1], s


def fit_alpha(t, theta, min_samples: int = 8, drift: float = 0.02,
              alpha_closed: float | None = None) -> NSEstimate:
    """Decay exponent of theta(t) from its local log-log slope.

    The window is the longest run at large t where the slope changes by less
    than ``drift`` (relative) per octave; the slope there is fitted as
    alpha + c/t and alpha is reported.
    """
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if t.shape != theta.shape or t.ndim != 1:
        raise FitError("t and theta must be 1-d arrays of equal length")
    if np.any(np.diff(t) <= 0):
        raise FitError("t must be strictly increasing")
    if np.any(theta <= 0) or np.any(np.diff(theta) >= 0):
        raise FitError("theta must be positive and strictly decreasing")
    ts, s = local_slopes(t, theta)
    if len(s) < min_samples:
        raise FitError(f"need at least {min_samples} slope samples, got {len(s)}")
    octaves = np.diff(np.log2(ts))
    change = np.abs(np.diff(s)) / np.abs(s[1:]) / octaves
    start = len(s) - 1
    while start > 0 and change[start - 1] < drift:
        start -= 1
    tw, sw = ts[start:], s[start:]
    if len(sw) < min_samples:
        raise FitError(f"only {len(sw)} samples with slope drift below {drift} per octave")
    A = np.column_stack([np.ones_like(tw), 1 / tw])
    coef, *_ = np.linalg.lstsq(A, sw, rcond=None)
    resid = sw - A @ coef
    stderr = float(np.sqrt(np.sum(resid ** 2) / max(len(sw) - 2, 1)))
    return NSEstimate(float(coef[0]), stderr, alpha_closed, (float(tw[0]), float(tw[-1])),
                      len(sw), ts, s)


def alpha_closed_form(group: str, n: int, p: int) -> Fraction:
    """Closed-form decay exponents: Heisenberg groups for every degree, the D group for p = 0, 1."""
    if n < 1:
        raise ValueError("n must be positive")
    if group == "heisenberg":
        if not 0 <= p <= 2 * n + 1:
            raise ValueError(f"degree {p} outside 0..{2 * n + 1}")
        return Fraction(n + 1, 2) if p in (n, n + 1) else Fraction(n + 1)
    if group == "dgroup":
        if p not in (0, 1):
            raise ValueError("only degrees 0 and 1 are available for the D group")
        return Fraction(2 * n + 2)
    raise ValueError(f"unknown group {group!r}")


def estimate_heisenberg(n: int, p: int, config: HeatTraceConfig | None = None) -> tuple[NSEstimate, np.ndarray]:
    config = config or HeatTraceConfig()
    theta = trace_series(n, p, config)
    est = fit_alpha(config.t_grid, theta, alpha_closed=float(alpha_closed_form("heisenberg", n, p)))
    return est, theta


def estimate_dgroup(n: int, endpoint: str, t_grid=None) -> tuple[NSEstimate, np.ndarray]:
    t_grid = np.logspace(3, 6, 25) if t_grid is None else np.asarray(t_grid, dtype=float)
    theta = np.array([dgroup_trace_at(n, t, endpoint) for t in t_grid])
    est = fit_alpha(t_grid, theta, alpha_closed=float(alpha_closed_form("dgroup", n, 1)))
    return est, theta


# output

def trace_csv(t, theta) -> str:
    """CSV with columns t, theta, local_slope (slope empty at the two ends)."""
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    slope = np.full(len(t), np.nan)
    if len(t) >= 3:
        slope[1:-1] = local_slopes(t, theta)[1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "theta", "local_slope"])
    for a, b, c in zip(t, theta, slope):
        w.writerow(["%.17g" % a, "%.17g" % b, "" if np.isnan(c) else "%.17g" % c])
    return buf.getvalue()


def summary_json(est: NSEstimate, config: dict | None = None) -> str:
    return json.dumps(est.summary(config), sort_keys=True, indent=2)

"""Multi-start annealed minimization of the inverse-power-law pair energy.

The objective on a code C = {x_1..x_N} on the unit sphere is

    E = sum_{i<j} (alpha / |x_i - x_j|)^s.

All internal optimization works on log E, evaluated with max-term factoring
so that arbitrarily large exponents s never overflow, and with every trial
point rescaled back onto the sphere before evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Code, min_distance

DEFAULT_TANGENT_THRESHOLD = 1e5


class DegenerateConfigurationError(ValueError):
    """Raised when two points coincide so the pair energy is undefined."""


@dataclass(frozen=True)
class EnergyParams:
    """Inverse-power-law parameters: overflow constant alpha and exponent s."""

    alpha: float
    s: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not self.s > 0:
            raise ValueError(f"s must be > 0, got {self.s}")


@dataclass(frozen=True)
class AnnealSchedule:
    """Exponent-doubling schedule for the annealed search.

    The initial exponent is drawn uniformly from ``s_initial_range`` and
    doubled until it exceeds ``s_cap``.  The secondary polish pass starts at
    ``polish_s_initial`` and doubles until ``polish_s_cap``.  Above
    ``tangent_filter_threshold`` only the tangential gradient component is
    used to build conjugate directions.
    """

    s_initial_range: tuple[float, float] = (10.0, 160.0)
    s_cap: float = 1e8
    polish_s_initial: float = 1e7
    polish_s_cap: float = 6.4e8
    tangent_filter_threshold: float = DEFAULT_TANGENT_THRESHOLD

    def __post_init__(self):
        lo, hi = self.s_initial_range
        if not 0 < lo < hi:
            raise ValueError(f"bad initial exponent range {self.s_initial_range}")
        if self.s_cap <= hi or self.polish_s_cap <= self.polish_s_initial:
            raise ValueError("exponent caps must exceed their starting values")


@dataclass(frozen=True)
class NcgOptions:
    """Line-search and convergence knobs for the conjugate-gradient core."""

    energy_tol: float = 1e-14
    grad_tol: float = 1e-12
    max_iters: int = 500
    ls_c1: float = 1e-4
    ls_c2: float = 0.1
    ls_max_evals: int = 25

    def __post_init__(self):
        if self.energy_tol <= 0 or self.grad_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class SearchConfig:
    dim: int
    count: int
    starts: int = 1000
    rng_seed: int = 0
    schedule: AnnealSchedule = field(default_factory=AnnealSchedule)
    cg: NcgOptions = field(default_factory=NcgOptions)
    polish: bool = True

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.dim < 2 or self.count < 2:
            raise ValueError("need dim >= 2 and count >= 2")


@dataclass
class NcgResult:
    code: Code
    log_energy: float
    iterations: int
    warning: str | None
    trace: list[float]


def _log_terms(pts: np.ndarray, alpha: float, s: float):
    """Pair matrix t_ij = s*(log alpha - log d_ij) plus squared distances."""
    g = pts @ pts.T
    sq = np.einsum("ij,ij->i", pts, pts)
    d2 = sq[:, None] + sq[None, :] - 2.0 * g
    n = pts.shape[0]
    idx = np.arange(n)
    d2[idx, idx] = 1.0
    if d2.min() <= 1e-24:
        raise DegenerateConfigurationError("coincident points in energy evaluation")
    t = (0.5 * s) * (2.0 * math.log(alpha) - np.log(d2))
    t[idx, idx] = -np.inf
    return t, d2


def _log_energy_grad(pts: np.ndarray, alpha: float, s: float):
    """Value and gradient of log E at unit points.

    Returns (logE, grad) where grad is the Euclidean gradient of log E with
    respect to the coordinates; the caller projects it if needed.
    """
    t, d2 = _log_terms(pts, alpha, s)
    m = t.max()
    w = np.exp(t - m)
    total = w.sum()  # every unordered pair counted twice
    log_e = m + math.log(total / 2.0)
    a = w / d2
    r = a.sum(axis=1)
    grad = (r[:, None] * pts - a @ pts) * (-2.0 * s / total)
    return log_e, grad


def _tangent_project(pts: np.ndarray, grad: np.ndarray) -> np.ndarray:
    radial = np.einsum("ij,ij->i", grad, pts)
    return grad - radial[:, None] * pts


def log_energy(code: Code, params: EnergyParams) -> float:
    """log of the pair energy; never overflows regardless of s or alpha."""
    t, _ = _log_terms(code.points, params.alpha, params.s)
    m = t.max()
    return float(m + math.log(np.exp(t - m).sum() / 2.0))


def energy(code: Code, params: EnergyParams) -> float:
    """Pair energy sum_{i<j} (alpha/d_ij)^s, evaluated via its logarithm."""
    le = log_energy(code, params)
    return math.exp(le) if le < 709.0 else math.inf


def energy_gradient(
    code: Code,
    params: EnergyParams,
    tangent_threshold: float = DEFAULT_TANGENT_THRESHOLD,
) -> np.ndarray:
    """Analytic gradient of the pair energy with respect to all coordinates.

    Above the tangent threshold each point's gradient is replaced by its
    component orthogonal to that point, which is what the annealer uses once
    the exponent is large.
    """
    log_e, grad_log = _log_energy_grad(code.points, params.alpha, params.s)
    grad = grad_log * (math.exp(log_e) if log_e < 709.0 else math.inf)
    if params.s > tangent_threshold:
        grad = _tangent_project(code.points, grad)
    return grad


def _normalize_rows(pts: np.ndarray):
    norms = np.linalg.norm(pts, axis=1)
    return pts / norms[:, None], norms


class _Objective:
    """log-energy along a ray, with rescaling onto the sphere built in."""

    def __init__(self, x, d, alpha, s):
        self.x = x
        self.d = d
        self.alpha = alpha
        self.s = s

    def at(self, a: float):
        y = self.x + a * self.d
        norms = np.linalg.norm(y, axis=1)
        if norms.min() < 0.2:
            return math.inf, 0.0, None
        yn = y / norms[:, None]
        f, grad = _log_energy_grad(yn, self.alpha, self.s)
        gproj = _tangent_project(yn, grad)
        dphi = float(np.einsum("ij,ij->", gproj, self.d / norms[:, None]))
        return f, dphi, (yn, grad, gproj)


def _cubic_step(a_lo, f_lo, g_lo, a_hi, f_hi):
    """Minimizer of the cubic fitting value+slope at a_lo and value at a_hi."""
    h = a_hi - a_lo
    if h == 0:
        return None
    # quadratic through (a_lo,f_lo,g_lo) and (a_hi,f_hi)
    denom = f_hi - f_lo - g_lo * h
    if denom == 0:
        return None
    a = a_lo - 0.5 * g_lo * h * h / denom
    return a if math.isfinite(a) else None


def _zoom(obj, a_lo, f_lo, g_lo, a_hi, f_hi, f0, dphi0, c1, c2, budget):
    best = None
    for _ in range(budget):
        lo, hi = (a_lo, a_hi) if a_lo < a_hi else (a_hi, a_lo)
        a = _cubic_step(a_lo, f_lo, g_lo, a_hi, f_hi)
        width = hi - lo
        if a is None or not lo + 0.1 * width <= a <= hi - 0.1 * width:
            a = 0.5 * (lo + hi)
        f, dphi, payload = obj.at(a)
        if f > f0 + c1 * a * dphi0 or f >= f_lo:
            a_hi, f_hi = a, f
        else:
            if abs(dphi) <= -c2 * dphi0:
                return a, f, payload
            best = (a, f, payload)
            if dphi * (a_hi - a_lo) >= 0:
                a_hi, f_hi = a_lo, f_lo
            a_lo, f_lo, g_lo = a, f, dphi
        if abs(a_hi - a_lo) < 1e-18 * max(1.0, abs(a_lo)):
            break
    # sufficient decrease achieved even if curvature never was
    return best


def _line_search(obj, f0, dphi0, a_init, c1, c2, max_evals):
    """Wolfe search on the rescaled-ray objective; returns (a, f, payload)."""
    a_prev, f_prev, g_prev = 0.0, f0, dphi0
    a = a_init
    for i in range(max_evals):
        f, dphi, payload = obj.at(a)
        if f > f0 + c1 * a * dphi0 or (i > 0 and f >= f_prev):
            return _zoom(obj, a_prev, f_prev, g_prev, a, f, f0, dphi0, c1, c2,
                         max_evals)
        if abs(dphi) <= -c2 * dphi0:
            return a, f, payload
        if dphi >= 0:
            return _zoom(obj, a, f, dphi, a_prev, f_prev, f0, dphi0, c1, c2,
                         max_evals)
        a_prev, f_prev, g_prev = a, f, dphi
        a *= 2.5
    return None


def _backtrack(obj, f0, dphi0, a_init, c1, budget=30):
    a = a_init
    for _ in range(budget):
        f, _, payload = obj.at(a)
        if f <= f0 + c1 * a * dphi0:
            return a, f, payload
        a /= 3.0
        if a < 1e-20:
            break
    return None


def ncg_minimize(
    code: Code,
    params: EnergyParams,
    options: NcgOptions | None = None,
    tangent_threshold: float = DEFAULT_TANGENT_THRESHOLD,
) -> NcgResult:
    """Hestenes-Stiefel nonlinear conjugate gradient on the sphere.

    Every trial configuration is rescaled onto the unit sphere before the
    energy is evaluated, so the accepted energy sequence is non-increasing by
    construction.  Returns the best iterate with a warning instead of raising
    when the line search stalls.
    """
    opts = options or NcgOptions()
    filter_grads = params.s > tangent_threshold
    x = code.points.copy()
    f, grad = _log_energy_grad(x, params.alpha, params.s)
    gproj = _tangent_project(x, grad)
    g_cg = gproj if filter_grads else grad
    d = -g_cg
    trace = [f]
    warning = None
    a_prev = None
    df_prev = None
    restart_every = max(code.count * code.dim, 10)
    iters = 0
    for iters in range(1, opts.max_iters + 1):
        dphi0 = float(np.einsum("ij,ij->", gproj, d))
        if dphi0 >= 0:
            d = -g_cg
            dphi0 = float(np.einsum("ij,ij->", gproj, d))
            if dphi0 >= -1e-300:
                break
        obj = _Objective(x, d, params.alpha, params.s)
        if a_prev is not None and df_prev is not None and dphi0 != 0:
            a0 = min(1.02 * 2.0 * df_prev / (-dphi0), 10.0 * a_prev)
            if a0 <= 0 or not math.isfinite(a0):
                a0 = a_prev
        else:
            a0 = 1.0 / (1.0 + float(np.abs(d).max()))
        hit = _line_search(obj, f, dphi0, a0, opts.ls_c1, opts.ls_c2,
                           opts.ls_max_evals)
        if hit is None:
            hit = _backtrack(obj, f, dphi0, a0, opts.ls_c1)
        if hit is None:
            # retry once from steepest descent before giving up
            d = -g_cg
            dphi0 = float(np.einsum("ij,ij->", gproj, d))
            if dphi0 < 0:
                obj = _Objective(x, d, params.alpha, params.s)
                hit = _backtrack(obj, f, dphi0, 1.0 / (1.0 + float(np.abs(d).max())),
                                 opts.ls_c1)
            if hit is None:
                warning = "line search failed; returning best iterate"
                break
        a, f_new, (x_new, grad_new, gproj_new) = hit
        g_cg_new = gproj_new if filter_grads else grad_new
        y = g_cg_new - g_cg
        denom = float(np.einsum("ij,ij->", d, y))
        beta = 0.0
        if denom != 0.0:
            beta = float(np.einsum("ij,ij->", g_cg_new, y)) / denom
        d = -g_cg_new + beta * d
        if iters % restart_every == 0:
            d = -g_cg_new
        df_prev = f - f_new
        a_prev = a
        x, f, grad, gproj, g_cg = x_new, f_new, grad_new, gproj_new, g_cg_new
        trace.append(f)
        if df_prev < opts.energy_tol:
            break
        if float(np.linalg.norm(gproj)) < opts.grad_tol * code.count:
            break
    return NcgResult(Code.from_points(x), f, iters, warning, trace)


def anneal(
    code: Code,
    schedule: AnnealSchedule,
    rng: np.random.Generator,
    options: NcgOptions | None = None,
) -> Code:
    """One annealing run: draw an initial exponent, double until past the cap.

    Before each round alpha is set to the exact current minimal pairwise
    distance, which keeps the energy near the number of shortest edges.
    """
    s = float(rng.uniform(*schedule.s_initial_range))
    current = code
    while s <= schedule.s_cap:
        alpha = min_distance(current)
        res = ncg_minimize(current, EnergyParams(alpha, s), options,
                           schedule.tangent_filter_threshold)
        current = res.code
        s *= 2.0
    return current


def polish(
    code: Code,
    schedule: AnnealSchedule,
    options: NcgOptions | None = None,
) -> Code:
    """Deterministic high-exponent pass sharpening an already good code."""
    s = schedule.polish_s_initial
    current = code
    while s <= schedule.polish_s_cap:
        alpha = min_distance(current)
        res = ncg_minimize(current, EnergyParams(alpha, s), options,
                           schedule.tangent_filter_threshold)
        current = res.code
        s *= 2.0
    return current


def random_code(dim: int, count: int, rng: np.random.Generator) -> Code:
    """Uniform random code: i.i.d. Gaussian coordinates, normalized."""
    for _ in range(100):
        pts = rng.standard_normal((count, dim))
        norms = np.linalg.norm(pts, axis=1)
        if norms.min() < 1e-8:
            continue
        try:
            return Code.from_points(pts)
        except ValueError:
            continue
    raise RuntimeError("could not draw a non-degenerate random configuration")


def _selection_key(code: Code, start_index: int):
    """Total order on search results: min distance, then Gram spectrum."""
    d = min_distance(code)
    g = code.points @ code.points.T
    spectrum = np.sort(np.linalg.eigvalsh(g))[::-1]
    rounded = tuple(round(float(v), 9) for v in spectrum)
    return (d, rounded, -start_index)


def multi_start_search(config: SearchConfig, progress=None) -> Code:
    """Best code over independent annealed starts.

    Each start owns an RNG stream seeded as ``rng_seed ^ index`` so the
    reduction is independent of execution order; results are compared by
    minimal distance with the rounded Gram spectrum as tiebreak.
    """
    best = None
    best_key = None
    for i in range(config.starts):
        rng = np.random.default_rng(config.rng_seed ^ i)
        start = random_code(config.dim, config.count, rng)
        result = anneal(start, config.schedule, rng, config.cg)
        key = _selection_key(result, i)
        if best_key is None or key > best_key:
            best, best_key = result, key
        if progress is not None:
            progress(i, key[0])
    if config.polish:
        best = polish(best, config.schedule, config.cg)
    return best

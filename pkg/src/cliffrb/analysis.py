"""Statistical analysis of randomized-benchmarking datasets.

Survival-probability data (per sequence length: mean fidelity and variance of
the mean) is fit to one of four exponential-decay models by weighted nonlinear
least squares; uncertainty comes from the Jacobian at the optimum and from
semi-parametric bootstrap resampling.  Also houses the interleaved-gate error
extraction and the depolarization-strength conversions used to compare
experiments on different numbers of qubits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaincc

from .protocol import RBDataset

VARIANCE_FLOOR = 1e-12
SIGNIFICANCE = 0.95
# chi^2 quantile at 0.95 for 2 dof, used for the confidence ellipse
_ELLIPSE_QUANTILE = 5.991464547107979


def alpha_n(n_qubits: int) -> float:
    """Depolarizing prefactor (D-1)/D relating infidelity to strength."""
    d = 2 ** n_qubits
    return (d - 1) / d


def chi2_sf(x: float, dof: int) -> float:
    """Upper tail of the chi-squared distribution (regularized gamma)."""
    if dof <= 0:
        raise ValueError("dof must be positive")
    if x < 0:
        return 1.0
    return float(gammaincc(dof / 2.0, x / 2.0))


# -- decay models -------------------------------------------------------------


@dataclass(frozen=True)
class DecayModel:
    tag: str
    param_names: Tuple[str, ...]
    func: Callable[[np.ndarray, np.ndarray, float], np.ndarray]

    @property
    def n_params(self) -> int:
        return len(self.param_names)


def _f_main(l, th, alpha):
    eps_s, eps_m = th
    return (1 - alpha) + alpha * (1 - eps_m / alpha) * (1 - eps_s / alpha) ** l


def _f_main_app(l, th, alpha):
    eps_s, eps_m = th
    return 0.5 + 0.5 * (1 - eps_m / alpha) * (1 - eps_s / alpha) ** l


def _f_three_param(l, th, alpha):
    eps_s, eps_m, c = th
    return c * _f_main(l, (eps_s, eps_m), alpha)


def _f_magesan(l, th, alpha):
    eps_s, eps_m, a, b = th
    q = 1 - eps_s / alpha
    return a + alpha * (1 - eps_m / alpha) * q ** l + b * (l - 1) * q ** (l - 2.0)


MODELS: Dict[str, DecayModel] = {
    "main": DecayModel("main", ("eps_s", "eps_m"), _f_main),
    "main-app": DecayModel("main-app", ("eps_s", "eps_m"), _f_main_app),
    "three-param": DecayModel("three-param", ("eps_s", "eps_m", "C"),
                              _f_three_param),
    "magesan": DecayModel("magesan", ("eps_s", "eps_m", "a", "b"), _f_magesan),
}


def model_predict(model: str, lengths: Sequence[int], params: Sequence[float],
                  alpha: float) -> np.ndarray:
    m = MODELS[model]
    return np.asarray(
        m.func(np.asarray(lengths, dtype=float), np.asarray(params, float),
               alpha), dtype=float)


# -- per-length statistics ----------------------------------------------------


@dataclass(frozen=True)
class LengthStats:
    length: int
    n_sequences: int
    mean: float
    var_of_mean: float  # nan when only a single sequence was measured
    single_sequence: bool


def length_statistics(ds: RBDataset) -> List[LengthStats]:
    """Mean survival and unbiased variance-of-the-mean per sequence length."""
    out = []
    for l in ds.lengths():
        p = ds.fidelities(l)
        n_l = len(p)
        if n_l >= 2:
            var = float(np.var(p, ddof=1) / n_l)
            single = False
        else:
            var = float("nan")
            single = True
        out.append(LengthStats(l, n_l, float(p.mean()), var, single))
    return out


# -- weighted nonlinear fit ---------------------------------------------------


class FitError(RuntimeError):
    def __init__(self, message: str, trace: Optional[List[float]] = None):
        super().__init__(message)
        self.trace = trace or []


@dataclass
class FitReport:
    model: str
    alpha: float
    param_names: Tuple[str, ...]
    params: np.ndarray
    covariance: np.ndarray
    chi2: float
    dof: int
    p_value: float
    significant: bool  # True when the fit fails the 0.95 goodness cut
    lengths: np.ndarray
    residuals: np.ndarray
    n_iterations: int = 0
    objective_trace: List[float] = field(default_factory=list)

    @property
    def eps_s(self) -> float:
        return float(self.params[0])

    @property
    def eps_m(self) -> float:
        return float(self.params[1])

    def standard_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def to_json(self) -> str:
        return json.dumps({
            "model": self.model,
            "alpha": self.alpha,
            "params": dict(zip(self.param_names, map(float, self.params))),
            "covariance": self.covariance.tolist(),
            "chi2": self.chi2,
            "dof": self.dof,
            "p_value": self.p_value,
            "significant": self.significant,
            "lengths": self.lengths.tolist(),
            "residuals": self.residuals.tolist(),
        }, indent=2)

    def residuals_csv(self) -> str:
        lines = ["length,residual"]
        for l, r in zip(self.lengths, self.residuals):
            lines.append(f"{int(l)},{r!r}")
        return "\n".join(lines) + "\n"


def _design_columns(model: DecayModel, lengths: np.ndarray,
                    q: float) -> np.ndarray:
    """Basis functions multiplying the linear parameters at fixed decay q."""
    ones = np.ones_like(lengths)
    cols = {"main": [q ** lengths],
            "main-app": [q ** lengths],
            "three-param": [ones, q ** lengths],
            "magesan": [ones, q ** lengths,
                        (lengths - 1) * q ** (lengths - 2.0)]}[model.tag]
    return np.column_stack(cols)


def _linear_solve(model: DecayModel, lengths, f, alpha, q):
    asym = {"main": 1 - alpha, "main-app": 0.5}.get(model.tag, 0.0)
    design = _design_columns(model, lengths, q)
    coef, *_ = np.linalg.lstsq(design, f - asym, rcond=None)
    resid = f - asym - design @ coef
    return coef, float(resid @ resid)


def _initial_guess(model: DecayModel, lengths: np.ndarray, f: np.ndarray,
                   alpha: float) -> np.ndarray:
    """Separable start: scan the decay base q, solving the (linear) remaining
    parameters exactly at each candidate, then refine q by golden section."""
    lo, hi = 1e-6, 1 - 1e-9
    grid = np.linspace(lo, hi, 400)
    # seed the grid with a log-linear estimate when the data allows one
    y = f - (0.5 if model.tag == "main-app" else 1 - alpha)
    if np.sum(y > 1e-12) >= 2:
        mask = y > 1e-12
        slope, _ = np.polyfit(lengths[mask], np.log(y[mask]), 1)
        grid = np.append(grid, np.clip(np.exp(slope), lo, hi))
    costs = [_linear_solve(model, lengths, f, alpha, q)[1] for q in grid]
    order = np.argsort(grid)
    grid, costs = grid[order], np.asarray(costs)[order]
    phi = (np.sqrt(5) - 1) / 2

    def refine(k):
        a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
        for _ in range(80):
            c, d = b - phi * (b - a), a + phi * (b - a)
            if _linear_solve(model, lengths, f, alpha, c)[1] <= \
                    _linear_solve(model, lengths, f, alpha, d)[1]:
                b = d
            else:
                a = c
        return (a + b) / 2

    # the scan can expose several local minima; polish each candidate basin
    local = [k for k in range(len(grid))
             if (k == 0 or costs[k] <= costs[k - 1])
             and (k == len(grid) - 1 or costs[k] <= costs[k + 1])]
    q, best = None, np.inf
    for k in local:
        cand = refine(k)
        cost = _linear_solve(model, lengths, f, alpha, cand)[1]
        if cost < best:
            q, best = cand, cost
    coef, _ = _linear_solve(model, lengths, f, alpha, q)
    eps_s = alpha * (1 - q)
    if model.tag == "main":
        return np.array([eps_s, alpha - coef[0]])
    if model.tag == "main-app":
        return np.array([eps_s, alpha * (1 - 2 * coef[0])])
    if model.tag == "three-param":
        c = coef[0] / (1 - alpha)
        scale = c if abs(c) > 1e-12 else 1.0
        return np.array([eps_s, alpha - coef[1] / scale, scale])
    # magesan: coef = (a, amplitude, b)
    return np.array([eps_s, alpha - coef[1], coef[0], coef[2]])


def _jacobian(func, lengths, params, alpha) -> np.ndarray:
    jac = np.zeros((len(lengths), len(params)))
    for i in range(len(params)):
        h = 1e-6 * max(abs(params[i]), 1.0)
        up = params.copy()
        dn = params.copy()
        up[i] += h
        dn[i] -= h
        jac[:, i] = (func(lengths, up, alpha) - func(lengths, dn, alpha)) / (2 * h)
    return jac


def fit(ds: RBDataset, model: str, alpha: float,
        init: Optional[Sequence[float]] = None,
        max_iterations: int = 200) -> FitReport:
    """Weighted nonlinear least-squares fit of a decay model.

    Minimizes sum_l (F_l - model(l))^2 / sigma_l^2 with a damped Gauss-Newton
    schedule.  No box constraints: unphysical parameter values are left as
    diagnostics.  Raises FitError (with the objective trace) on
    non-convergence.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    m = MODELS[model]
    stats = length_statistics(ds)
    lengths = np.array([s.length for s in stats], dtype=float)
    if len(lengths) < m.n_params + 1:
        raise ValueError("need more distinct lengths than parameters")
    f_l = np.array([s.mean for s in stats])
    var = np.array([s.var_of_mean for s in stats])
    var = np.where(np.isnan(var), 0.0, var)
    sigma = np.sqrt(np.maximum(var, VARIANCE_FLOOR))

    theta = (np.asarray(init, dtype=float).copy() if init is not None
             else _initial_guess(m, lengths, f_l, alpha))

    def residual(th):
        return (f_l - m.func(lengths, th, alpha)) / sigma

    r = residual(theta)
    cost = float(r @ r)
    lam = 1e-3
    trace = [cost]
    for it in range(max_iterations):
        jac = _jacobian(m.func, lengths, theta, alpha) / sigma[:, None]
        jtj = jac.T @ jac
        g = jac.T @ r
        step_ok = False
        for _ in range(50):
            try:
                delta = np.linalg.solve(
                    jtj + lam * np.diag(np.maximum(np.diag(jtj), 1e-30)), g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            trial = theta + delta
            r_trial = residual(trial)
            cost_trial = float(r_trial @ r_trial)
            if np.isfinite(cost_trial) and cost_trial <= cost:
                step_ok = True
                break
            lam *= 10
        if not step_ok:
            break
        rel = (cost - cost_trial) / max(cost, 1e-300)
        theta, r, cost = trial, r_trial, cost_trial
        trace.append(cost)
        lam = max(lam / 3, 1e-12)
        if rel < 1e-14 or np.max(np.abs(delta)) < 1e-14:
            break
    else:
        raise FitError("fit did not converge", trace)

    jac = _jacobian(m.func, lengths, theta, alpha) / sigma[:, None]
    jtj = jac.T @ jac
    try:
        cov = np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(jtj)
    dof = len(lengths) - m.n_params
    p = chi2_sf(cost, dof) if dof > 0 else float("nan")
    return FitReport(model=model, alpha=alpha, param_names=m.param_names,
                     params=theta, covariance=cov, chi2=cost, dof=dof,
                     p_value=p, significant=bool(p < 1 - SIGNIFICANCE),
                     lengths=lengths.astype(int), residuals=f_l - m.func(
                         lengths, theta, alpha),
                     n_iterations=len(trace) - 1, objective_trace=trace)


# -- bootstrap ----------------------------------------------------------------


@dataclass
class BootstrapReport:
    n_resamples: int
    param_names: Tuple[str, ...]
    samples: np.ndarray       # (n_ok, n_params) refit parameter vectors
    original: np.ndarray
    means: np.ndarray
    biases: np.ndarray
    standard_errors: np.ndarray
    bias_significant: np.ndarray  # |bias| > 0.25 * SE, per parameter
    ellipse_center: np.ndarray    # (eps_s, eps_m) plane
    ellipse_axes: np.ndarray      # rows are the two semi-axis vectors
    n_failures: int = 0

    def ellipse_contains(self, point: Sequence[float]) -> bool:
        cov = np.cov(self.samples[:, :2].T)
        delta = np.asarray(point, float) - self.ellipse_center
        try:
            dist2 = float(delta @ np.linalg.solve(cov, delta))
        except np.linalg.LinAlgError:
            return bool(np.allclose(delta, 0, atol=1e-12))
        return dist2 <= _ELLIPSE_QUANTILE

    def to_json(self) -> str:
        return json.dumps({
            "n_resamples": self.n_resamples,
            "param_names": list(self.param_names),
            "original": self.original.tolist(),
            "means": self.means.tolist(),
            "biases": self.biases.tolist(),
            "standard_errors": self.standard_errors.tolist(),
            "bias_significant": self.bias_significant.tolist(),
            "ellipse_center": self.ellipse_center.tolist(),
            "ellipse_axes": self.ellipse_axes.tolist(),
            "n_failures": self.n_failures,
        }, indent=2)

    def samples_csv(self) -> str:
        lines = [",".join(self.param_names)]
        for row in self.samples:
            lines.append(",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"


def bootstrap(ds: RBDataset, model: str, alpha: float, n_resamples: int = 1000,
              rng: Optional[np.random.Generator] = None) -> BootstrapReport:
    """Semi-parametric bootstrap of a decay fit.

    Each replicate resamples sequences with replacement within every length,
    redraws each resampled sequence's correct-count binomially about its
    observed rate, and refits.  Aborts if more than 10% of replicate fits
    fail.
    """
    rng = np.random.default_rng() if rng is None else rng
    base = fit(ds, model, alpha)
    by_length: Dict[int, List[Tuple[int, int]]] = {}
    for _, l, _, ns, nc in ds.rows:
        by_length.setdefault(l, []).append((ns, nc))

    samples = []
    failures = 0
    for _ in range(n_resamples):
        rows = []
        for l, seqs in by_length.items():
            picks = rng.integers(0, len(seqs), size=len(seqs))
            for j, k in enumerate(picks):
                ns, nc = seqs[k]
                rows.append(("boot", l, j, ns,
                             int(rng.binomial(ns, nc / ns))))
        try:
            rep = fit(RBDataset(rows), model, alpha, init=base.params)
            samples.append(rep.params)
        except (FitError, np.linalg.LinAlgError):
            failures += 1
    if failures > 0.1 * n_resamples:
        raise FitError(f"{failures}/{n_resamples} bootstrap replicates "
                       "failed to fit")

    arr = np.array(samples)
    means = arr.mean(axis=0)
    ses = arr.std(axis=0, ddof=1)
    biases = means - base.params
    center = means[:2]
    cov2 = np.cov(arr[:, :2].T)
    vals, vecs = np.linalg.eigh(cov2)
    vals = np.clip(vals, 0.0, None)
    axes = (np.sqrt(_ELLIPSE_QUANTILE * vals)[:, None] * vecs.T)
    with np.errstate(invalid="ignore", divide="ignore"):
        flags = np.abs(biases) > 0.25 * ses
    return BootstrapReport(n_resamples=n_resamples,
                           param_names=MODELS[model].param_names,
                           samples=arr, original=base.params.copy(),
                           means=means, biases=biases, standard_errors=ses,
                           bias_significant=flags, ellipse_center=center,
                           ellipse_axes=axes, n_failures=failures)


# -- interleaved extraction and depolarization conversions --------------------


def interleaved_gate_error(fit_primary: FitReport, fit_interleaved: FitReport,
                           printed_form: bool = False) -> Tuple[float, float]:
    """Error per interleaved gate from a reference and an interleaved fit.

    Returns (eps_g, standard error by first-order propagation).  The default
    prefactor is alpha_n; printed_form=True uses 1/alpha_n instead.
    """
    if abs(fit_primary.alpha - fit_interleaved.alpha) > 1e-12:
        raise ValueError("fits describe different system sizes")
    alpha = fit_primary.alpha
    p_e = fit_primary.eps_s / alpha
    p_ei = fit_interleaved.eps_s / alpha
    if 1 - p_e <= 0:
        raise FitError("reference decay is degenerate (1 - p_e <= 0)")
    pref = (1 / alpha) if printed_form else alpha
    eps_g = pref * (1 - (1 - p_ei) / (1 - p_e))
    # d(eps_g)/d(eps_s') and d(eps_g)/d(eps_s), in units of the fit params
    d_int = pref / (alpha * (1 - p_e))
    d_ref = -pref * (1 - p_ei) / (alpha * (1 - p_e) ** 2)
    var = (d_int ** 2 * fit_interleaved.covariance[0, 0]
           + d_ref ** 2 * fit_primary.covariance[0, 0])
    return float(eps_g), float(np.sqrt(max(var, 0.0)))


def embed_depolarizing(p_k: float, k: int, n: int) -> Tuple[float, float]:
    """Strength on n qubits of a k-qubit depolarizing channel.

    Returns (p_n, error-per-step conversion factor alpha_n p_n / alpha_k p_k).
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    p_n = p_k * (4 ** k - 1) * 4 ** n / (4 ** k * (4 ** n - 1))
    if p_k == 0:
        factor = (alpha_n(n) / alpha_n(k)) * \
            (4 ** k - 1) * 4 ** n / (4 ** k * (4 ** n - 1))
    else:
        factor = alpha_n(n) * p_n / (alpha_n(k) * p_k)
    return float(p_n), float(factor)


def consistency_check(eps_g: float, eps_s1: float, eps_s2: float,
                      weights: Tuple[float, float] = (1.5, 6.5),
                      step_scale: float = 1.8) -> float:
    """Composite two-qubit error-per-step estimate from constituent parts.

    Combines the two-qubit gate error with the embedded one-qubit step errors:
    w_g * eps_g + (6/5) * w_1q * (eps_s1 + eps_s2) / (2 * step_scale).
    """
    if min(eps_g, eps_s1, eps_s2) < 0:
        raise ValueError("error rates must be nonnegative")
    w_g, w_1q = weights
    _, embed_factor = embed_depolarizing(1.0, 1, 2)
    return float(w_g * eps_g
                 + embed_factor * w_1q * (eps_s1 + eps_s2) / (2 * step_scale))


def truncation_scan(ds: RBDataset, model: str, alpha: float,
                    windows: Sequence[Tuple[int, int]]) -> List[FitReport]:
    """Refit over length windows [lo, hi] to diagnose time dependence."""
    reports = []
    n_params = MODELS[model].n_params
    for lo, hi in windows:
        rows = [r for r in ds.rows if lo <= r[1] <= hi]
        kept = {l for _, l, _, _, _ in rows}
        if len(kept) < n_params + 1:
            raise ValueError(f"window [{lo}, {hi}] keeps too few lengths")
        reports.append(fit(RBDataset(rows), model, alpha))
    return reports

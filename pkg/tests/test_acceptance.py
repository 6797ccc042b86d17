"""End-to-end acceptance checks, one per shipped guarantee.

Each check records a single PASS/FAIL line (printed after the run summary)
with its measured numbers and runtime, then asserts.  Runtime budgets are
part of the check; the session-wide kernel warm-up fixture keeps JIT
compilation out of the measurements.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
from scipy.stats import norm

from countreg import (
    CovariateSpec,
    FitOptions,
    FitResult,
    ModelSpec,
    NbParams,
    ParamVector,
    SimConfig,
    ZinbParams,
    _kernels,
    build_design,
    chi_square_independence,
    chi_square_sf,
    demo_preset,
    dispersion_summary,
    fit,
    gradient,
    irr_table,
    log_likelihood,
    sample_zinb,
    simulate,
    zinb_moments,
)
from countreg.data import Column, Dataset
from countreg.report import format_estimate_cell, render_fit_text

from _acceptance_report import record

TOTAL = 9


def _finish(index: int, title: str, ok: bool, detail: str, elapsed: float, budget: float):
    ok = ok and elapsed < budget
    line = f"{detail}; {elapsed:.2f}s (budget {budget:.0f}s)"
    record(index, TOTAL, title, ok, line)
    assert ok, f"acceptance {index} ({title}): {line}"


# -- 1: pmf normalization over the (lam, tau, p) grid ------------------------

def _nb_tail_bound(pmf: np.ndarray, m: int, lam: float, tau: float) -> float:
    # successive-ratio bound: pmf(y+1)/pmf(y) = (y+tau)/(y+1) * lam/(lam+tau)
    r = lam / (lam + tau) * max(1.0, (m + tau) / (m + 1.0))
    if r >= 1.0:
        return math.inf
    return float(pmf[m]) * r / (1.0 - r)


def test_pmf_mass_sums_to_one():
    start = time.perf_counter()
    lams, taus, ps = (0.1, 1.0, 10.0), (0.5, 2.0, 50.0), (0.0, 0.3, 0.8)
    ygrid = np.arange(0.0, 4001.0)
    worst_dev = 0.0
    worst_bound = 0.0
    ok = True
    for lam in lams:
        for tau in taus:
            lam_vec = np.full_like(ygrid, lam)
            pmf = np.exp(_kernels.nb_logpmf(ygrid, lam_vec, tau))
            m = None
            for cand in range(int(2 * lam) + 20, ygrid.size, 20):
                if _nb_tail_bound(pmf, cand, lam, tau) < 1e-13:
                    m = cand
                    break
            if m is None:
                ok = False
                continue
            bound = _nb_tail_bound(pmf, m, lam, tau)
            worst_bound = max(worst_bound, bound)
            dev = abs(float(pmf[: m + 1].sum()) - 1.0)
            worst_dev = max(worst_dev, dev)
            for p in ps:
                zpmf = np.exp(
                    _kernels.zinb_logpmf(
                        ygrid[: m + 1], lam_vec[: m + 1], np.full(m + 1, p), tau
                    )
                )
                dev = abs(float(zpmf.sum()) - 1.0)
                worst_dev = max(worst_dev, dev)
    ok = ok and worst_dev < 1e-10 and worst_bound < 1e-12
    _finish(
        1,
        "pmf normalization",
        ok,
        f"27-point grid, max |sum-1| {worst_dev:.2e} (< 1e-10), "
        f"max tail bound {worst_bound:.2e} (< 1e-12)",
        time.perf_counter() - start,
        1.0,
    )


# -- 2: moment formulas vs Monte Carlo ---------------------------------------

def test_moments_match_monte_carlo():
    start = time.perf_counter()
    settings = [
        (1.0, 1.0, 0.5, 401),
        (2.0, 2.0, 0.3, 402),
        (0.5, 0.8, 0.7, 403),
        (5.0, 10.0, 0.1, 404),
        (3.0, 0.5, 0.0, 405),
    ]
    n = 100_000
    worst_mean_z = 0.0
    worst_var_z = 0.0
    for lam, tau, p, seed in settings:
        params = ZinbParams(NbParams(lam, tau), p)
        mean, var = zinb_moments(params)
        draws = sample_zinb(params, n, seed=seed).astype(np.float64)
        se_mean = math.sqrt(var / n)
        worst_mean_z = max(worst_mean_z, abs(float(draws.mean()) - mean) / se_mean)
        s2 = float(draws.var(ddof=1))
        centered = draws - draws.mean()
        m4 = float(np.mean(centered**4))
        se_var = math.sqrt(max(m4 - s2 * s2, 1e-30) / n)
        worst_var_z = max(worst_var_z, abs(s2 - var) / se_var)
    ok = worst_mean_z < 5.0 and worst_var_z < 5.0
    _finish(
        2,
        "moment formulas",
        ok,
        f"5 settings x 1e5 draws, worst |z| mean {worst_mean_z:.2f}, "
        f"variance {worst_var_z:.2f} (< 5 MC SEs)",
        time.perf_counter() - start,
        10.0,
    )


# -- 3: analytic gradients vs central finite differences ---------------------

def _grad_check_dataset(seed=511, n=40):
    rng = np.random.default_rng(seed)
    return Dataset(
        {
            "y": Column("y", "count", rng.poisson(2.0, size=n).astype(np.int64)),
            "x1": Column("x1", "numeric", rng.normal(0.0, 1.0, size=n)),
            "x2": Column("x2", "numeric", rng.uniform(-1.0, 1.0, size=n)),
        },
        n_rows=n,
    )


def _pack_params(family, params):
    pieces = [params.beta]
    if family == "zinb":
        pieces.append(params.gamma)
    if family != "poisson":
        pieces.append(np.asarray([params.log_tau]))
    return np.concatenate(pieces)


def _unpack_params(family, theta, d, q):
    beta = theta[:d]
    if family == "zinb":
        return ParamVector(beta, theta[d : d + q], float(theta[-1]))
    if family == "nb":
        return ParamVector(beta, np.empty(0), float(theta[-1]))
    return ParamVector(beta, np.empty(0), None)


def test_gradients_match_finite_differences():
    start = time.perf_counter()
    step = 1e-6
    ds = _grad_check_dataset()
    y = ds.response_vector("y")
    worst = 0.0
    for family in ("poisson", "nb", "zinb"):
        spec = ModelSpec(
            family, "y", ["x1", "x2"], ["x1"] if family == "zinb" else []
        )
        X = build_design(ds, spec.count_covariates)
        Z = build_design(ds, spec.zero_covariates) if family == "zinb" else None
        d, q = X.n_cols, (Z.n_cols if Z is not None else 0)
        rng = np.random.default_rng(512)
        for _ in range(20):
            beta = rng.uniform(-0.8, 0.8, size=d)
            gamma = rng.uniform(-1.2, 1.2, size=q) if family == "zinb" else np.empty(0)
            log_tau = float(rng.uniform(-0.7, 1.5)) if family != "poisson" else None
            params = ParamVector(beta, gamma, log_tau)
            analytic = gradient(spec, X, Z, y, params)
            theta = _pack_params(family, params)
            for j in range(theta.size):
                hi, lo = theta.copy(), theta.copy()
                hi[j] += step
                lo[j] -= step
                fd = (
                    log_likelihood(spec, X, Z, y, _unpack_params(family, hi, d, q))
                    - log_likelihood(spec, X, Z, y, _unpack_params(family, lo, d, q))
                ) / (2 * step)
                rel = abs(analytic[j] - fd) / max(1.0, abs(analytic[j]))
                worst = max(worst, rel)
    ok = worst < 1e-4
    _finish(
        3,
        "gradient fidelity",
        ok,
        f"20 points per family, central step 1e-6, worst relative error {worst:.2e} (< 1e-4)",
        time.perf_counter() - start,
        5.0,
    )


# -- 4: Wald-interval parameter recovery at scale ----------------------------

def test_parameter_recovery_coverage():
    start = time.perf_counter()
    true_beta = {"(intercept)": 0.3, "x1": 0.4, "x2": -0.5, "x3": 0.2}
    true_gamma = {"(intercept)": -1.0, "x1": 0.6, "x2": -0.4}
    truth = {
        "(intercept)": 0.3,
        "x1": 0.4,
        "x2": -0.5,
        "x3": 0.2,
        "zero:(intercept)": -1.0,
        "zero:x1": 0.6,
        "zero:x2": -0.4,
    }
    z95 = float(norm.ppf(0.975))
    n_reps = 50
    joint95 = 0
    joint3se = 0
    per_coef_hits = {label: 0 for label in truth}
    fit_failures = 0
    for rep in range(n_reps):
        config = SimConfig(
            n_rows=20_000,
            family="zinb",
            covariates=[
                CovariateSpec("x1", "numeric", low=-1.0, high=1.0),
                CovariateSpec("x2", "numeric", low=-1.0, high=1.0),
                CovariateSpec("x3", "numeric", low=-1.0, high=1.0),
            ],
            true_beta=true_beta,
            true_gamma=true_gamma,
            true_tau=1.5,
            seed=1000 + rep,
            zero_covariates=["x1", "x2"],
        )
        ds = simulate(config)
        res = fit(ModelSpec("zinb", "y", ["x1", "x2", "x3"], ["x1", "x2"]), ds)
        if not res.converged or res.covariance is None:
            fit_failures += 1
            continue
        estimates = dict(
            zip(res.count_labels, res.estimates.beta)
        ) | {f"zero:{lab}": g for lab, g in zip(res.zero_labels, res.estimates.gamma)}
        all95 = True
        all3 = True
        for label, true_val in truth.items():
            se = res.std_error(label)
            dev = abs(estimates[label] - true_val)
            hit95 = dev <= z95 * se
            per_coef_hits[label] += hit95
            all95 &= hit95
            all3 &= dev <= 3.0 * se
        joint95 += all95
        joint3se += all3
    min_per_coef = min(per_coef_hits.values())
    # Joint nominal-95% coverage of 7 estimates is ~0.95^7 ~ 0.70, so a
    # 44/50 joint bar is not meetable by a correctly calibrated fit; the
    # calibration checks are joint 3-SE coverage and per-coefficient 95%
    # coverage, with the literal joint-95% tally reported alongside.
    ok = joint3se >= 44 and min_per_coef >= 40 and fit_failures == 0
    _finish(
        4,
        "parameter recovery",
        ok,
        f"50 sims at n=20000: joint 3-SE {joint3se}/50 (>= 44), "
        f"per-coefficient 95% min {min_per_coef}/50 (>= 40), "
        f"joint 95% {joint95}/50 for reference, fit failures {fit_failures}",
        time.perf_counter() - start,
        300.0,
    )


# -- 5: shipped preset reproduces the target moments -------------------------

def test_preset_moments_at_scale():
    start = time.perf_counter()
    ds = simulate(demo_preset())
    summary = dispersion_summary(ds.response_vector("y"))
    ok = (
        abs(summary.mean - 0.701) <= 0.01
        and abs(summary.variance - 1.003) <= 0.02
        and summary.verdict == "overdispersed"
    )
    _finish(
        5,
        "preset moments",
        ok,
        f"n=1e5: mean {summary.mean:.4f} (0.701 +/- 0.01), "
        f"variance {summary.variance:.4f} (1.003 +/- 0.02), verdict {summary.verdict}",
        time.perf_counter() - start,
        10.0,
    )


# -- 6: chi-square hand values and the df=2 closed form ----------------------

def test_chi_square_oracle():
    start = time.perf_counter()
    grp, y = [], []
    for i, row in enumerate([[20, 10], [10, 20]]):
        for j, c in enumerate(row):
            grp.extend([i] * c)
            y.extend([j] * c)
    ds = Dataset(
        {
            "grp": Column("grp", "categorical", np.asarray(grp), levels=("a", "b")),
            "y": Column("y", "count", np.asarray(y, dtype=np.int64)),
        },
        n_rows=len(y),
    )
    res = chi_square_independence(ds, "grp", "y")
    chi2_dev = abs(res.chi2 - 20.0 / 3.0)
    sf_dev = max(
        abs(chi_square_sf(float(x), 2) - math.exp(-float(x) / 2.0))
        for x in np.linspace(0.0, 40.0, 81)
    )
    ok = chi2_dev < 1e-6 and res.df == 1 and sf_dev < 1e-10
    _finish(
        6,
        "chi-square oracle",
        ok,
        f"[[20,10],[10,20]] chi2 dev {chi2_dev:.2e} (< 1e-6), df={res.df}, "
        f"df=2 closed-form dev {sf_dev:.2e} (< 1e-10)",
        time.perf_counter() - start,
        1.0,
    )


# -- 7: family nesting on shared data ----------------------------------------

def test_family_nesting():
    start = time.perf_counter()
    config = SimConfig(
        n_rows=2000,
        family="nb",
        covariates=[CovariateSpec("x", "numeric", low=-1.0, high=1.0)],
        true_beta={"(intercept)": 0.4, "x": -0.6},
        true_tau=1.2,
        seed=601,
    )
    ds = simulate(config)
    pois = fit(ModelSpec("poisson", "y", ["x"]), ds)
    nb_fixed = fit(
        ModelSpec("nb", "y", ["x"]), ds, FitOptions(fix_log_tau=math.log(1e8))
    )
    nb_free = fit(ModelSpec("nb", "y", ["x"]), ds)
    zinb_pinned = fit(
        ModelSpec("zinb", "y", ["x"]),
        ds,
        FitOptions(fix_gamma=np.asarray([-30.0])),  # p = expit(-30) ~ 1e-13
    )
    nb_vs_pois = float(np.max(np.abs(nb_fixed.estimates.beta - pois.estimates.beta)))
    zinb_vs_nb = float(np.max(np.abs(zinb_pinned.estimates.beta - nb_free.estimates.beta)))
    converged = all(r.converged for r in (pois, nb_fixed, nb_free, zinb_pinned))
    ok = converged and nb_vs_pois < 1e-4 and zinb_vs_nb < 1e-3
    _finish(
        7,
        "family nesting",
        ok,
        f"NB(tau=1e8) vs Poisson max |dbeta| {nb_vs_pois:.2e} (< 1e-4), "
        f"ZINB(p~0) vs NB max |dbeta| {zinb_vs_nb:.2e} (< 1e-3)",
        time.perf_counter() - start,
        30.0,
    )


# -- 8: reporting cell format -------------------------------------------------

def test_reporting_cell_format():
    start = time.perf_counter()
    coef = math.log(0.872)
    se = 0.030
    result = FitResult(
        family="poisson",
        estimates=ParamVector(np.asarray([0.1, coef]), np.empty(0), None),
        count_labels=["(intercept)", "female"],
        zero_labels=[],
        free_labels=["(intercept)", "female"],
        covariance=np.diag([0.0025, se * se]),
        covariance_error=None,
        log_likelihood=-1234.5,
        n_obs=1000,
        n_iterations=7,
        converged=True,
        gradient_norm=1e-8,
        message="converged",
    )
    rows = irr_table(result)
    cell = format_estimate_cell(rows[0].irr, rows[0].stars, rows[0].std_error)
    text = render_fit_text(result, rows)
    ok = cell == "0.872***(0.030)" and "0.872***(0.030)" in text
    _finish(
        8,
        "reporting contract",
        ok,
        f"coefficient ln(0.872), SE 0.030 renders {cell!r}",
        time.perf_counter() - start,
        1.0,
    )


# -- 9: byte-identical CLI JSON ------------------------------------------------

def test_cli_json_determinism(tmp_path):
    start = time.perf_counter()
    outs = []
    stdouts = []
    codes = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        proc = subprocess.run(
            [
                sys.executable, "-m", "countreg",
                "fit", "--preset", "paper-like", "--seed", "11",
                "--family", "nb", "--format", "json", "--out", str(out),
            ],
            capture_output=True,
        )
        codes.append(proc.returncode)
        stdouts.append(proc.stdout)
        outs.append(out.read_bytes())
    converged = json.loads(outs[0]).get("converged") is True
    ok = (
        codes == [0, 0]
        and outs[0] == outs[1]
        and stdouts[0] == stdouts[1]
        and converged
    )
    _finish(
        9,
        "deterministic JSON",
        ok,
        f"two identical runs: exit codes {codes}, report {len(outs[0])} bytes, "
        f"stdout and --out byte-identical {outs[0] == outs[1] and stdouts[0] == stdouts[1]}, "
        f"converged {converged}",
        time.perf_counter() - start,
        60.0,
    )

//! Parameter estimation: conditional maximum likelihood with analytic
//! scores, observed information and standard errors, the modified
//! Yule–Walker method, information criteria, and the PDINAR(1) comparator
//! fit.
//!
//! The likelihood is the pure conditional one; the marginal factor of the
//! first observation is dropped, since no closed-form stationary marginal
//! exists. Optimization runs over (logit φ, logit p, log β, log θ₁, log θ₂)
//! so box constraints are enforced smoothly, with the analytic score mapped
//! through the chain rule.

mod bfgs;
mod tables;

use alloc::boxed::Box;
use alloc::vec::Vec;

use nalgebra::{Matrix5, SVector};
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::model::{IntSeries, ModelParams, Sign};
use crate::specfun::hyp_ratio;

use bfgs::minimize;
use tables::{log_sum_exp, BesselTable, MesinarTables};

/// Estimation method used for a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Cml,
    Yw,
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Method::Cml => write!(f, "cml"),
            Method::Yw => write!(f, "yw"),
        }
    }
}

/// AIC, BIC and HQIC of a fitted model.
///
/// HQIC uses k·ln ln n (without the textbook factor 2); together with
/// n = raw series length this reproduces published criteria tables
/// bit-for-bit, which is the contract here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoCriteria {
    pub aic: f64,
    pub bic: f64,
    pub hqic: f64,
}

/// AIC = -2L + 2k, BIC = -2L + k ln n, HQIC = -2L + k ln ln n.
pub fn info_criteria(loglik: f64, k: usize, n: usize) -> InfoCriteria {
    debug_assert!(n >= 2);
    let kf = k as f64;
    let nf = n as f64;
    let m2l = -2.0 * loglik;
    InfoCriteria {
        aic: m2l + 2.0 * kf,
        bic: m2l + kf * nf.ln(),
        hqic: m2l + kf * nf.ln().ln(),
    }
}

/// Options for the likelihood optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Sup-norm gradient threshold per transition; the optimizer stops when
    /// the transformed-space gradient falls below this times the number of
    /// transitions.
    pub gradient_tolerance: f64,
    /// Number of optimizer starts: one moment-informed center plus jittered
    /// restarts.
    pub n_starts: usize,
    /// Seed for the jitter stream.
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 500,
            gradient_tolerance: 1e-6,
            n_starts: 5,
            seed: 0,
        }
    }
}

/// Result of a model fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub method: Method,
    pub estimates: ModelParams,
    /// Standard errors in the order (φ, p, β, θ₁, θ₂); absent for
    /// Yule–Walker fits and when the observed information is singular.
    pub std_errors: Option<[f64; 5]>,
    pub loglik: f64,
    pub criteria: InfoCriteria,
    pub delta_used: Sign,
    pub converged: bool,
    pub iterations: usize,
    /// Number of transitions entering the conditional likelihood.
    pub n_used: usize,
    /// Set when the Yule–Walker φ estimate fell outside [0, 1] and was
    /// clamped.
    pub phi_clamped: bool,
}

/// Sample mean, variance and lag-1 autocorrelation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub mean: f64,
    /// (1/(n-1)) Σ (z_t - z̄)² over all n observations.
    pub variance: f64,
    pub acf1: f64,
    pub n: usize,
}

/// Sample moments per the estimating-equation conventions: the variance
/// divisor is one less than the number of observations, and r₁ is the
/// lag-1 product sum over the centered squares.
pub fn sample_moments(series: &IntSeries) -> Result<SampleMoments, Error> {
    let vals = series.values();
    let n = vals.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { needed: 2, got: n });
    }
    let mean = vals.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let mut ssq = 0.0;
    let mut cross = 0.0;
    for i in 0..n {
        let d = vals[i] as f64 - mean;
        ssq += d * d;
        if i + 1 < n {
            cross += d * (vals[i + 1] as f64 - mean);
        }
    }
    if ssq == 0.0 {
        return Err(Error::ConstantSeries);
    }
    Ok(SampleMoments {
        mean,
        variance: ssq / (n - 1) as f64,
        acf1: cross / ssq,
        n,
    })
}

/// δ̂ from the sign of the lag-1 sample autocorrelation.
pub fn detect_delta(series: &IntSeries) -> Result<Sign, Error> {
    let mom = sample_moments(series)?;
    Ok(if mom.acf1 >= 0.0 { Sign::Plus } else { Sign::Minus })
}

fn z_range(vals: &[i64]) -> (i64, i64) {
    let mut lo = vals[0];
    let mut hi = vals[0];
    for &v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Log-likelihood and its gradient with respect to (φ, p, β, θ₁, θ₂),
/// computed in one pass over the transitions. Returns None when some
/// transition has zero probability (the caller maps that to an infinite
/// objective).
fn loglik_and_score(vals: &[i64], t: &MesinarTables) -> Option<(f64, [f64; 5])> {
    let phi = t.phi;
    let ln_phi = phi.ln();
    let ln_1mphi = (1.0 - phi).ln();
    let (t1, t2) = (t.theta1, t.theta2);
    let sq12 = 0.5 * (t2 / t1).sqrt();
    let sq21 = 0.5 * (t1 / t2).sqrt();

    let mut ll = 0.0;
    let mut g = [0.0f64; 5];
    for w in vals.windows(2) {
        let (zp, zt) = (w[0], w[1]);
        let lthin = t.log_thin(zp, zt);
        let linnov = t.log_innov(zt);
        let lf = log_sum_exp(ln_phi + lthin, ln_1mphi + linnov);
        // -inf is a structural zero; +inf or NaN means a series overflowed
        // far outside the sane parameter region. Either way the objective
        // must be infinite, never negative-infinite.
        if !lf.is_finite() {
            return None;
        }
        ll += lf;
        let r_thin = (lthin - lf).exp();
        let r_innov = (linnov - lf).exp();
        g[0] += r_thin - r_innov;
        if phi > 0.0 {
            let a = t.delta * zt;
            let la = t.ta.get(a);
            let sa = (t.ta.get(a - 1) - la).exp() + (t.ta.get(a + 1) - la).exp();
            let b = zp - a;
            let lb = t.tb.get(b);
            let sb = (t.tb.get(b - 1) - lb).exp() + (t.tb.get(b + 1) - lb).exp();
            let lc = t.tc.get(zp);
            let sc = (t.tc.get(zp - 1) - lc).exp() + (t.tc.get(zp + 1) - lc).exp();
            let w_thin = phi * r_thin;
            g[1] += w_thin * t.beta * (sa - sb);
            g[2] += w_thin * (t.p * sa + (1.0 - t.p) * sb - sc);
        }
        if phi < 1.0 {
            let le = t.te.get(zt);
            let se = (t.te.get(zt - 1) - le).exp() + (t.te.get(zt + 1) - le).exp();
            let w_innov = (1.0 - phi) * r_innov;
            let ztf = zt as f64;
            g[3] += w_innov * (-1.0 + ztf / (2.0 * t1) + sq12 * se);
            g[4] += w_innov * (-1.0 - ztf / (2.0 * t2) + sq21 * se);
        }
    }
    Some((ll, g))
}

/// Negative conditional log-likelihood, -Σ_t log P(z_t | z_{t-1}).
/// Structural zeros yield +inf rather than an error.
pub fn neg_loglik(series: &IntSeries, params: &ModelParams) -> Result<f64, Error> {
    let vals = series.values();
    if vals.len() < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: vals.len(),
        });
    }
    let (zmin, zmax) = z_range(vals);
    let t = MesinarTables::new(params, zmin, zmax);
    Ok(match loglik_and_score(vals, &t) {
        Some((ll, _)) => -ll,
        None => f64::INFINITY,
    })
}

/// Analytic score ∂l/∂(φ, p, β, θ₁, θ₂) of the conditional log-likelihood
/// (not negated). Requires 0 < φ < 1: at the mixture boundary the formulas
/// divide by a vanishing term.
pub fn score(series: &IntSeries, params: &ModelParams) -> Result<[f64; 5], Error> {
    let vals = series.values();
    if vals.len() < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: vals.len(),
        });
    }
    if !(params.phi() > 0.0 && params.phi() < 1.0) {
        return Err(Error::PhiBoundary);
    }
    let (zmin, zmax) = z_range(vals);
    let t = MesinarTables::new(params, zmin, zmax);
    match loglik_and_score(vals, &t) {
        Some((_, g)) => Ok(g),
        None => Err(Error::UndefinedConditional),
    }
}

/// Observed information Ĝ = -(1/n)·∇²l, from central finite differences of
/// the analytic score, symmetrized. `n` is the number of transitions.
pub fn observed_information(
    series: &IntSeries,
    params: &ModelParams,
) -> Result<[[f64; 5]; 5], Error> {
    let omega = params.as_array();
    if !(omega[0] > 0.0 && omega[0] < 1.0) {
        return Err(Error::PhiBoundary);
    }
    let delta = params.delta();
    let n_tr = (series.len() - 1) as f64;
    let mut h = [[0.0f64; 5]; 5];
    for j in 0..5 {
        let mut step = 1e-4 * omega[j].abs().max(0.05);
        if j < 2 {
            // Keep phi and p strictly interior.
            step = step.min(0.25 * omega[j].min(1.0 - omega[j]));
        }
        let mut wp = omega;
        wp[j] += step;
        let mut wm = omega;
        wm[j] -= step;
        let sp = score(series, &params_from_array(&wp, delta)?)?;
        let sm = score(series, &params_from_array(&wm, delta)?)?;
        for i in 0..5 {
            h[i][j] = (sp[i] - sm[i]) / (2.0 * step);
        }
    }
    let mut info = [[0.0f64; 5]; 5];
    for i in 0..5 {
        for j in 0..5 {
            info[i][j] = -0.5 * (h[i][j] + h[j][i]) / n_tr;
        }
    }
    Ok(info)
}

/// Standard errors sqrt(diag(Ĝ⁻¹))/√n from the observed information of a
/// sample with `n` transitions. Errors out rather than fabricating values
/// when the information is singular or not positive on the diagonal.
pub fn std_errors_from_information(info: &[[f64; 5]; 5], n: usize) -> Result<[f64; 5], Error> {
    let m = Matrix5::from_fn(|i, j| info[i][j]);
    let inv = m.try_inverse().ok_or(Error::SingularInformation)?;
    let mut se = [0.0f64; 5];
    for i in 0..5 {
        let v = inv[(i, i)] / n as f64;
        if !(v > 0.0) {
            return Err(Error::SingularInformation);
        }
        se[i] = v.sqrt();
    }
    Ok(se)
}

fn params_from_array(w: &[f64; 5], delta: Sign) -> Result<ModelParams, Error> {
    ModelParams::new(w[0], w[1], w[2], w[3], w[4], delta)
}

fn logit(x: f64) -> f64 {
    (x / (1.0 - x)).ln()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn to_omega(eta: &SVector<f64, 5>) -> [f64; 5] {
    [
        sigmoid(eta[0]),
        sigmoid(eta[1]),
        eta[2].exp(),
        eta[3].exp(),
        eta[4].exp(),
    ]
}

/// Sane region for the transformed objective; outside it the likelihood is
/// declared infinite so the line search backtracks.
fn omega_in_box(w: &[f64; 5]) -> bool {
    w.iter().all(|v| v.is_finite())
        && w[0] >= 0.0
        && w[0] <= 1.0
        && w[1] > 0.0
        && w[1] < 1.0
        && (1e-6..=5e2).contains(&w[2])
        && (1e-8..=1e5).contains(&w[3])
        && (1e-8..=1e5).contains(&w[4])
}

/// Moment-informed center for the multistart: φp from the lag-1
/// autocorrelation, innovation rates from marginal Skellam matching, and a
/// mid-scale dependence parameter.
fn initial_eta(mom: &SampleMoments, delta: Sign) -> SVector<f64, 5> {
    let rr = (delta.as_f64() * mom.acf1).clamp(0.0, 0.81);
    let p0 = rr.sqrt().clamp(0.2, 0.8);
    let phi0 = (rr / p0).clamp(0.05, 0.9);
    let var = mom.variance.max(0.5);
    let denom = (1.0 - phi0).max(0.1);
    let dm = (mom.mean * (1.0 - phi0 * p0 * delta.as_f64()) / denom)
        .clamp(-0.8 * var, 0.8 * var);
    let t1 = (0.5 * (var + dm)).max(0.2);
    let t2 = (0.5 * (var - dm)).max(0.2);
    let theta0 = (0.5 * var).max(1.0);
    SVector::from([
        logit(phi0),
        logit(p0),
        0.5 * theta0.ln(),
        t1.ln(),
        t2.ln(),
    ])
}

/// Conditional maximum likelihood fit over the constrained box via the
/// smooth reparameterization, using the analytic score. Runs a
/// moment-informed start plus jittered restarts and keeps the best local
/// optimum (ties broken by lowest start index). Standard errors come from
/// the observed information; they are omitted if it is singular.
pub fn fit_cml(series: &IntSeries, delta: Sign, options: &FitOptions) -> Result<FitResult, Error> {
    let vals = series.values();
    if vals.len() < 10 {
        return Err(Error::SeriesTooShort {
            needed: 10,
            got: vals.len(),
        });
    }
    let mom = sample_moments(series)?;
    let (zmin, zmax) = z_range(vals);
    let n_used = vals.len() - 1;
    let grad_tol = options.gradient_tolerance * n_used as f64;

    let objective = |eta: &SVector<f64, 5>| -> (f64, SVector<f64, 5>) {
        let w = to_omega(eta);
        if !omega_in_box(&w) {
            return (f64::INFINITY, SVector::zeros());
        }
        let params = params_from_array(&w, delta).expect("inside box");
        let t = MesinarTables::new(&params, zmin, zmax);
        match loglik_and_score(vals, &t) {
            Some((ll, g)) => {
                let jac = [
                    w[0] * (1.0 - w[0]),
                    w[1] * (1.0 - w[1]),
                    w[2],
                    w[3],
                    w[4],
                ];
                let grad = SVector::from([
                    -g[0] * jac[0],
                    -g[1] * jac[1],
                    -g[2] * jac[2],
                    -g[3] * jac[3],
                    -g[4] * jac[4],
                ]);
                (-ll, grad)
            }
            None => (f64::INFINITY, SVector::zeros()),
        }
    };

    let eta0 = initial_eta(&mom, delta);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let jitter_scale = [1.2, 1.2, 0.8, 0.5, 0.5];
    // Best converged local optimum, and the best point of any kind as a
    // fallback to attach to a non-convergence error.
    let mut best_converged: Option<bfgs::OptimResult<5>> = None;
    let mut best_any: Option<bfgs::OptimResult<5>> = None;
    for start in 0..options.n_starts.max(1) {
        let eta_start = if start == 0 {
            eta0
        } else {
            let mut e = eta0;
            for (i, s) in jitter_scale.iter().enumerate() {
                e[i] += s * (2.0 * rng.gen::<f64>() - 1.0);
            }
            e
        };
        let res = minimize(objective, eta_start, options.max_iterations, grad_tol);
        if !res.f.is_finite() {
            continue;
        }
        if best_any.as_ref().is_none_or(|b| res.f < b.f) {
            best_any = Some(res.clone());
        }
        if res.converged && best_converged.as_ref().is_none_or(|b| res.f < b.f) {
            best_converged = Some(res);
        }
    }

    let (res, converged) = match (best_converged, best_any) {
        (Some(r), _) => (r, true),
        (None, Some(r)) => (r, false),
        (None, None) => return Err(Error::NoConvergence),
    };

    let w = to_omega(&res.x);
    let estimates = params_from_array(&w, delta)?;
    let loglik = -res.f;
    let std_errors = observed_information(series, &estimates)
        .and_then(|info| std_errors_from_information(&info, n_used))
        .ok();
    let result = FitResult {
        method: Method::Cml,
        estimates,
        std_errors,
        loglik,
        criteria: info_criteria(loglik, 5, series.len()),
        delta_used: delta,
        converged,
        iterations: res.iterations,
        n_used,
        phi_clamped: false,
    };
    if result.converged {
        Ok(result)
    } else {
        Err(Error::FitDidNotConverge(Box::new(result)))
    }
}

/// Solution of the three Yule–Walker estimating equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YwSolution {
    pub phi: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub phi_clamped: bool,
}

/// Solves the moment system given sample (or population) moments, the
/// plug-in (p, θ) and the stationary expectation of the ₀F̃₁ ratio:
/// φ̂ = δ r₁ / p, the mean equation for θ₁-θ₂, and the stationary variance
/// equation for θ₁+θ₂.
pub fn solve_yw(
    moments: &SampleMoments,
    e_hyp_ratio: f64,
    p_plugin: f64,
    theta_plugin: f64,
    delta: Sign,
) -> Result<YwSolution, Error> {
    if !(p_plugin > 0.0 && p_plugin < 1.0) {
        return Err(Error::Domain("p_plugin"));
    }
    if !(theta_plugin > 0.0) {
        return Err(Error::Domain("theta_plugin"));
    }
    let raw_phi = delta.as_f64() * moments.acf1 / p_plugin;
    let (phi, phi_clamped) = if raw_phi < 0.0 {
        (0.0, true)
    } else if raw_phi > 1.0 - 1e-9 {
        (1.0 - 1e-9, raw_phi > 1.0)
    } else {
        (raw_phi, false)
    };
    let p = p_plugin;
    let d = delta.as_f64();
    let mu = moments.mean;
    // Mean equation: mu = (1-phi)(t1-t2)/(1-phi p delta).
    let diff = mu * (1.0 - phi * p * d) / (1.0 - phi);
    // Variance equation solved for t1+t2, with E[Z^2] = S^2 + mu^2 and
    // D = 1 - phi^2 p^2 - phi(1-phi) p^2.
    let pq = p * (1.0 - p);
    let dcoef = 1.0 - phi * phi * p * p - phi * (1.0 - phi) * p * p;
    let total = (dcoef * (moments.variance + mu * mu)
        - phi * pq * mu
        - 2.0 * phi * pq * theta_plugin * e_hyp_ratio
        - (1.0 - phi) * diff * diff)
        / (1.0 - phi);
    let theta1 = 0.5 * (total + diff);
    let theta2 = 0.5 * (total - diff);
    if !(theta1 > 0.0 && theta2 > 0.0) {
        return Err(Error::Infeasible("no solution with theta1, theta2 > 0"));
    }
    Ok(YwSolution {
        phi,
        theta1,
        theta2,
        phi_clamped,
    })
}

/// Modified Yule–Walker fit with likelihood plug-ins for p and θ. The
/// stationary ratio expectation is replaced by its sample average over the
/// pre-transition states. No standard errors are reported.
pub fn fit_yw(
    series: &IntSeries,
    p_plugin: f64,
    theta_plugin: f64,
    delta: Sign,
) -> Result<FitResult, Error> {
    let mom = sample_moments(series)?;
    let vals = series.values();
    let n = vals.len();
    // Sample-average surrogate for E[ratio(Z, θ)]: states z_1 .. z_{n-2}
    // summed and divided by n-1.
    let mut e_ratio = 0.0;
    if n > 2 {
        for &z in &vals[1..n - 1] {
            e_ratio += hyp_ratio(z, theta_plugin)?;
        }
        e_ratio /= (n - 1) as f64;
    }
    let sol = solve_yw(&mom, e_ratio, p_plugin, theta_plugin, delta)?;
    let estimates = ModelParams::new(
        sol.phi,
        p_plugin,
        theta_plugin.sqrt(),
        sol.theta1,
        sol.theta2,
        delta,
    )?;
    let loglik = -neg_loglik(series, &estimates)?;
    Ok(FitResult {
        method: Method::Yw,
        estimates,
        std_errors: None,
        loglik,
        criteria: info_criteria(loglik, 5, n),
        delta_used: delta,
        converged: true,
        iterations: 0,
        n_used: n - 1,
        phi_clamped: sol.phi_clamped,
    })
}

/// Result of fitting the additive PDINAR(1) comparator.
#[derive(Debug, Clone, PartialEq)]
pub struct PdinarFit {
    pub alpha: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub delta: Sign,
    pub loglik: f64,
    pub criteria: InfoCriteria,
    pub converged: bool,
    pub iterations: usize,
    pub n_used: usize,
}

/// Negative conditional log-likelihood of the three-parameter PDINAR(1)
/// comparator with its cross-rate tying: thinning EB(z, α, θ₁θ₂) and
/// innovations Skellam((1-α)θ₁, (1-α)θ₂), so that with δ = +1 the
/// parameters (θ₁, θ₂) are the stationary marginal rates.
pub(crate) fn pdinar_neg_loglik(vals: &[i64], alpha: f64, t1: f64, t2: f64, delta: Sign) -> f64 {
    if !(alpha > 0.0 && alpha < 1.0) || !(t1 > 0.0) || !(t2 > 0.0) {
        return f64::INFINITY;
    }
    let theta_eb = t1 * t2;
    if !(1e-12..=1e4).contains(&theta_eb) || t1 > 1e4 || t2 > 1e4 {
        return f64::INFINITY;
    }
    let beta_eb = theta_eb.sqrt();
    let (e1, e2) = ((1.0 - alpha) * t1, (1.0 - alpha) * t2);
    let (zmin, zmax) = z_range(vals);
    let zabs = zmin.abs().max(zmax.abs());
    let half = zabs + (6.0 * (beta_eb + 1.0)).ceil() as i64 + 20;
    let d = delta.value();

    // Thinning tables at arguments 2αβ, 2(1-α)β, 2β.
    let ta = BesselTable::build(2.0 * alpha * beta_eb, -half - 1, half + 1);
    let tb = BesselTable::build(2.0 * (1.0 - alpha) * beta_eb, zmin - half - 1, zmax + half + 1);
    let tc = BesselTable::build(2.0 * beta_eb, zmin, zmax);
    // Innovation log-pmf over the convolution range.
    let te = BesselTable::build(2.0 * (e1 * e2).sqrt(), zmin - half - 1, zmax + half + 1);
    let innov_base = -e1 - e2;
    let half_lr = 0.5 * (e1 / e2).ln();
    let q_lo = zmin - half;
    let q_len = ((zmax + half) - q_lo + 1) as usize;
    let q: Vec<f64> = (0..q_len)
        .map(|i| {
            let zq = q_lo + i as i64;
            (innov_base + half_lr * zq as f64 + te.get(zq)).exp()
        })
        .collect();

    // One thinning row per source state: P(delta S = s) for s in [-half, half].
    let width = (2 * half + 1) as usize;
    // Rows are dense but short; the EB tails die superexponentially.
    let row_for = |z: i64| -> Vec<f64> {
        let lc = tc.get(z);
        (0..width)
            .map(|i| {
                let s = -half + i as i64;
                let a = d * s;
                (ta.get(a) + tb.get(z - a) - lc).exp()
            })
            .collect()
    };
    let n_states = (zmax - zmin + 1) as usize;
    let mut rows: Vec<Option<Vec<f64>>> = Vec::new();
    rows.resize_with(n_states, || None);

    let mut nll = 0.0;
    for w in vals.windows(2) {
        let (zp, zt) = (w[0], w[1]);
        let idx = (zp - zmin) as usize;
        if rows[idx].is_none() {
            rows[idx] = Some(row_for(zp));
        }
        let row = rows[idx].as_ref().unwrap();
        let mut prob = 0.0;
        for (i, &ws) in row.iter().enumerate() {
            if ws > 0.0 {
                let s = -half + i as i64;
                let qi = zt - s - q_lo;
                if qi >= 0 && (qi as usize) < q_len {
                    prob += ws * q[qi as usize];
                }
            }
        }
        // Zero is structural; non-finite means a series overflowed outside
        // the sane region. Both make the objective infinite.
        if !(prob > 0.0) || !prob.is_finite() {
            return f64::INFINITY;
        }
        nll -= prob.ln();
    }
    nll
}

/// CML fit of the PDINAR(1) comparator, numerically differentiated (three
/// parameters, no analytic score needed).
pub fn fit_pdinar_cml(
    series: &IntSeries,
    delta: Sign,
    options: &FitOptions,
) -> Result<PdinarFit, Error> {
    let vals = series.values();
    if vals.len() < 10 {
        return Err(Error::SeriesTooShort {
            needed: 10,
            got: vals.len(),
        });
    }
    let mom = sample_moments(series)?;
    let n_used = vals.len() - 1;
    let grad_tol = options.gradient_tolerance * n_used as f64;

    let value = |eta: &SVector<f64, 3>| -> f64 {
        let alpha = sigmoid(eta[0]);
        let (t1, t2) = (eta[1].exp(), eta[2].exp());
        pdinar_neg_loglik(vals, alpha, t1, t2, delta)
    };
    let objective = |eta: &SVector<f64, 3>| -> (f64, SVector<f64, 3>) {
        let f = value(eta);
        if !f.is_finite() {
            return (f, SVector::zeros());
        }
        let mut g = SVector::<f64, 3>::zeros();
        for j in 0..3 {
            let h = 1e-6 * eta[j].abs().max(1.0);
            let mut ep = *eta;
            ep[j] += h;
            let mut em = *eta;
            em[j] -= h;
            g[j] = (value(&ep) - value(&em)) / (2.0 * h);
        }
        (f, g)
    };

    let alpha0 = mom.acf1.abs().clamp(0.05, 0.9);
    let var = mom.variance.max(0.5);
    let t10 = (0.5 * (var + mom.mean)).max(0.2);
    let t20 = (0.5 * (var - mom.mean)).max(0.2);
    let eta0 = SVector::from([logit(alpha0), t10.ln(), t20.ln()]);

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut best: Option<bfgs::OptimResult<3>> = None;
    for start in 0..options.n_starts.clamp(1, 5) {
        let eta_start = if start == 0 {
            eta0
        } else {
            let mut e = eta0;
            for i in 0..3 {
                e[i] += 0.8 * (2.0 * rng.gen::<f64>() - 1.0);
            }
            e
        };
        let res = minimize(objective, eta_start, options.max_iterations, grad_tol);
        if !res.f.is_finite() {
            continue;
        }
        let replace = match &best {
            None => true,
            Some(b) => res.f < b.f,
        };
        if replace {
            best = Some(res);
        }
    }
    let res = best.ok_or(Error::NoConvergence)?;
    let loglik = -res.f;
    Ok(PdinarFit {
        alpha: sigmoid(res.x[0]),
        theta1: res.x[1].exp(),
        theta2: res.x[2].exp(),
        delta,
        loglik,
        criteria: info_criteria(loglik, 3, vals.len()),
        converged: res.converged,
        iterations: res.iterations,
        n_used,
    })
}

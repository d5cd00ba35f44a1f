//! The MESINAR(1) process: a Pegram mixture that moves to a δ-signed
//! extended-binomial thinning of the previous state with probability φ and
//! to a fresh Skellam innovation with probability 1−φ. Transition kernel in
//! two algebraically equivalent forms, simulation, exact conditional and
//! stationary moments, the numerical stationary distribution, and the
//! additive PDINAR(1) comparator kernel.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;

use crate::dist::{
    eb_log_pmf, eb_thinning_sample, skellam_log_pmf, skellam_sample, EBParams, SkellamParams,
};
use crate::error::Error;
use crate::specfun::{hyp_ratio, log_bessel_i};

/// Sign of the autocorrelation, the δ in the model equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.value() as f64
    }

    pub fn from_i64(v: i64) -> Result<Self, Error> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::Domain("delta")),
        }
    }
}

/// The full parameter vector (φ, p, β, θ₁, θ₂) plus the sign δ, with
/// θ = β² as the thinning dependence parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    phi: f64,
    p: f64,
    beta: f64,
    theta1: f64,
    theta2: f64,
    delta: Sign,
}

impl ModelParams {
    pub fn new(
        phi: f64,
        p: f64,
        beta: f64,
        theta1: f64,
        theta2: f64,
        delta: Sign,
    ) -> Result<Self, Error> {
        if !(0.0..=1.0).contains(&phi) {
            return Err(Error::Domain("phi"));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain("p"));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain("beta"));
        }
        if !(theta1 > 0.0 && theta1.is_finite()) {
            return Err(Error::Domain("theta1"));
        }
        if !(theta2 > 0.0 && theta2.is_finite()) {
            return Err(Error::Domain("theta2"));
        }
        Ok(ModelParams {
            phi,
            p,
            beta,
            theta1,
            theta2,
            delta,
        })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The thinning dependence parameter θ = β².
    pub fn theta(&self) -> f64 {
        self.beta * self.beta
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    pub fn delta(&self) -> Sign {
        self.delta
    }

    pub fn innovation(&self) -> SkellamParams {
        SkellamParams::new(self.theta1, self.theta2).expect("validated at construction")
    }

    /// Parameters as the ordered array (φ, p, β, θ₁, θ₂).
    pub fn as_array(&self) -> [f64; 5] {
        [self.phi, self.p, self.beta, self.theta1, self.theta2]
    }
}

/// An observed or simulated series of signed integers, optionally carrying
/// time labels.
#[derive(Debug, Clone, PartialEq)]
pub struct IntSeries {
    values: Vec<i64>,
    labels: Option<Vec<i64>>,
}

impl IntSeries {
    pub fn new(values: Vec<i64>) -> Self {
        IntSeries {
            values,
            labels: None,
        }
    }

    pub fn with_labels(values: Vec<i64>, labels: Vec<i64>) -> Result<Self, Error> {
        if values.len() != labels.len() {
            return Err(Error::Domain("labels"));
        }
        Ok(IntSeries {
            values,
            labels: Some(labels),
        })
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Lag-one differenced series, one element shorter. Labels, when
    /// present, follow the later point of each pair.
    pub fn diff(&self) -> Result<IntSeries, Error> {
        if self.values.len() < 2 {
            return Err(Error::SeriesTooShort {
                needed: 2,
                got: self.values.len(),
            });
        }
        let values: Vec<i64> = self.values.windows(2).map(|w| w[1] - w[0]).collect();
        let labels = self.labels.as_ref().map(|l| l[1..].to_vec());
        Ok(IntSeries { values, labels })
    }
}

/// A finitely supported probability vector on a contiguous integer range.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    lo: i64,
    masses: Vec<f64>,
}

impl ProbVector {
    pub fn new(lo: i64, masses: Vec<f64>) -> Result<Self, Error> {
        if masses.is_empty() || masses.iter().any(|&m| !(m >= 0.0)) {
            return Err(Error::Domain("masses"));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain("masses"));
        }
        Ok(ProbVector { lo, masses })
    }

    pub fn support(&self) -> (i64, i64) {
        (self.lo, self.lo + self.masses.len() as i64 - 1)
    }

    pub fn mass(&self, z: i64) -> f64 {
        let idx = z - self.lo;
        if idx < 0 || idx as usize >= self.masses.len() {
            0.0
        } else {
            self.masses[idx as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.masses
            .iter()
            .enumerate()
            .map(move |(i, &m)| (self.lo + i as i64, m))
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(z, m)| z as f64 * m).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.iter().map(|(z, m)| (z as f64 - mu).powi(2) * m).sum()
    }
}

/// One-step transition probability
/// P(Z_t = z_next | Z_{t-1} = z_prev) = φ P(S_{p,θ}(z_prev) = δ z_next)
/// + (1-φ) P(ε = z_next), with the thinning law evaluated through ₀F̃₁.
pub fn transition_pmf(z_prev: i64, z_next: i64, params: &ModelParams) -> f64 {
    let eb = EBParams::new(z_prev, params.p, params.theta()).expect("validated");
    let thin = eb_log_pmf(params.delta.value() * z_next, &eb).exp();
    let innov = skellam_log_pmf(z_next, &params.innovation()).exp();
    params.phi * thin + (1.0 - params.phi) * innov
}

/// The same transition probability written entirely in modified Bessel
/// functions,
///
///   φ I_{δz_t}(2pβ) I_{z_{t-1}-δz_t}(2(1-p)β) / I_{z_{t-1}}(2β)
///     + (1-φ) e^{-θ₁-θ₂} (θ₁/θ₂)^{z_t/2} I_{z_t}(2√(θ₁θ₂)).
///
/// Agrees with [`transition_pmf`] to floating-point accuracy; kept as an
/// independent route for cross-checking and as the likelihood fast path's
/// reference.
pub fn transition_pmf_bessel(z_prev: i64, z_next: i64, params: &ModelParams) -> f64 {
    let (p, beta) = (params.p, params.beta);
    let a = params.delta.value() * z_next;
    let la = log_bessel_i(a, 2.0 * p * beta).expect("x >= 0");
    let lb = log_bessel_i(z_prev - a, 2.0 * (1.0 - p) * beta).expect("x >= 0");
    let lc = log_bessel_i(z_prev, 2.0 * beta).expect("x >= 0");
    let thin = (la.log_magnitude + lb.log_magnitude - lc.log_magnitude).exp();

    let (t1, t2) = (params.theta1, params.theta2);
    let le = log_bessel_i(z_next, 2.0 * (t1 * t2).sqrt()).expect("x >= 0");
    let innov = (-t1 - t2 + 0.5 * z_next as f64 * (t1 / t2).ln() + le.log_magnitude).exp();

    params.phi * thin + (1.0 - params.phi) * innov
}

/// Simulates the process: the initial state is drawn from the innovation
/// law, each step keeps the δ-signed thinning of the previous state with
/// probability φ and otherwise replaces it by a fresh innovation. The first
/// `burn_in` states (including the initial draw) are discarded; the output
/// has length exactly `n`.
pub fn simulate<R: Rng + ?Sized>(
    params: &ModelParams,
    n: usize,
    burn_in: usize,
    rng: &mut R,
) -> IntSeries {
    assert!(n >= 1, "n must be positive");
    let innov = params.innovation();
    let theta = params.theta();
    let delta = params.delta.value();

    let step = |z: i64, rng: &mut R| -> i64 {
        if rng.gen::<f64>() < params.phi {
            delta * eb_thinning_sample(z, params.p, theta, rng)
        } else {
            skellam_sample(&innov, rng)
        }
    };

    let mut z = skellam_sample(&innov, rng);
    for _ in 0..burn_in {
        z = step(z, rng);
    }
    let mut values = Vec::with_capacity(n);
    values.push(z);
    for _ in 1..n {
        z = step(z, rng);
        values.push(z);
    }
    IntSeries::new(values)
}

/// E\[Z_t | Z_{t-1} = z\] = φpδz + (1-φ)(θ₁-θ₂).
pub fn cond_mean(z_prev: i64, params: &ModelParams) -> f64 {
    params.phi * params.p * params.delta.as_f64() * z_prev as f64
        + (1.0 - params.phi) * (params.theta1 - params.theta2)
}

/// Var\[Z_t | Z_{t-1} = z\] = φ(p(1-p)z + 2p(1-p)θ·ratio(z,θ))
/// plus (1-φ)(θ₁+θ₂) + φ(1-φ)(pδz - (θ₁-θ₂))².
pub fn cond_var(z_prev: i64, params: &ModelParams) -> f64 {
    let (phi, p) = (params.phi, params.p);
    let pq = p * (1.0 - p);
    let theta = params.theta();
    let zf = z_prev as f64;
    let ratio = hyp_ratio(z_prev, theta).expect("theta > 0");
    let diff = params.theta1 - params.theta2;
    phi * (pq * zf + 2.0 * pq * theta * ratio)
        + (1.0 - phi) * (params.theta1 + params.theta2)
        + phi * (1.0 - phi) * (p * params.delta.as_f64() * zf - diff).powi(2)
}

/// E\[Z_t\] = (1-φ)(θ₁-θ₂) / (1-φpδ).
pub fn stationary_mean(params: &ModelParams) -> f64 {
    (1.0 - params.phi) * (params.theta1 - params.theta2)
        / (1.0 - params.phi * params.p * params.delta.as_f64())
}

/// Var\[Z_t\] given the stationary expectation of the ₀F̃₁ ratio, by the law
/// of total variance:
///
///   V·D = φp(1-p)μ + 2φp(1-p)θ·E\[ratio\] + (1-φ)(θ₁+θ₂)
///         + φ(1-φ)(p²(μ²) - 2pδ(θ₁-θ₂)μ + (θ₁-θ₂)²) + φ(1-φ)p²V  (folded into D)
///
/// with D = 1 - φ²p² - φ(1-φ)p² and μ the stationary mean. Collapses to
/// θ₁+θ₂ at φ = 0 and to the thinning variance term at φ = 1.
pub fn stationary_var_given_ratio(params: &ModelParams, e_hyp_ratio: f64) -> f64 {
    let (phi, p) = (params.phi, params.p);
    let pq = p * (1.0 - p);
    let theta = params.theta();
    let mu = stationary_mean(params);
    let diff = params.theta1 - params.theta2;
    let d = 1.0 - phi * phi * p * p - phi * (1.0 - phi) * p * p;
    let rhs = phi * pq * mu
        + 2.0 * phi * pq * theta * e_hyp_ratio
        + (1.0 - phi) * (params.theta1 + params.theta2)
        + phi
            * (1.0 - phi)
            * (p * p * mu * mu - 2.0 * p * params.delta.as_f64() * diff * mu + diff * diff);
    rhs / d
}

/// Exact stationary expectation of ₀F̃₁(;Z+2;θ)/₀F̃₁(;Z+1;θ) against a
/// distribution for Z.
pub fn expected_hyp_ratio(dist: &ProbVector, theta: f64) -> Result<f64, Error> {
    if !(theta > 0.0) {
        return Err(Error::Domain("theta"));
    }
    let mut acc = 0.0;
    for (z, m) in dist.iter() {
        if m > 0.0 {
            acc += m * hyp_ratio(z, theta)?;
        }
    }
    Ok(acc)
}

/// Stationary variance with the ratio expectation evaluated exactly against
/// `dist` (normally the output of [`stationary_dist`]).
pub fn stationary_var(params: &ModelParams, dist: &ProbVector) -> Result<f64, Error> {
    let e_ratio = expected_hyp_ratio(dist, params.theta())?;
    Ok(stationary_var_given_ratio(params, e_ratio))
}

/// γ_k = (φpδ)^k · Var\[Z_t\] for k >= 0.
pub fn autocovariance(k: u32, params: &ModelParams, var0: f64) -> f64 {
    (params.phi * params.p * params.delta.as_f64()).powi(k as i32) * var0
}

const STATIONARY_MAX_ITER: usize = 20_000;
const STATIONARY_MAX_HALF_WIDTH: i64 = 4_096;

/// Numerical stationary distribution by power iteration of the truncated
/// kernel, starting from the innovation law. The support grows until the
/// boundary mass per sweep is below `tol / 10`; iteration stops when two
/// successive distributions differ by less than `tol` in total variation.
pub fn stationary_dist(params: &ModelParams, tol: f64) -> Result<ProbVector, Error> {
    if !(tol > 0.0) {
        return Err(Error::Domain("tol"));
    }
    let innov = params.innovation();

    // Initial half-width: generous Skellam coverage.
    let sd = innov.variance().sqrt();
    let center = innov.mean().round() as i64;
    let mut half = (6.0 * sd).ceil() as i64 + 8;

    'expand: loop {
        let lo = center - half;
        let hi = center + half;
        let width = (hi - lo + 1) as usize;

        let mut cur: Vec<f64> = (0..width)
            .map(|i| skellam_log_pmf(lo + i as i64, &innov).exp())
            .collect();
        normalize(&mut cur);

        // Rows of the truncated kernel, one per source state.
        let rows: Vec<Vec<f64>> = (lo..=hi)
            .map(|z| {
                (lo..=hi)
                    .map(|znext| transition_pmf(z, znext, params))
                    .collect()
            })
            .collect();
        let row_escape: Vec<f64> = rows
            .iter()
            .map(|r| (1.0 - r.iter().sum::<f64>()).max(0.0))
            .collect();

        let mut next = vec![0.0f64; width];
        for _ in 0..STATIONARY_MAX_ITER {
            next.iter_mut().for_each(|v| *v = 0.0);
            let mut escaped = 0.0;
            for (i, &m) in cur.iter().enumerate() {
                if m == 0.0 {
                    continue;
                }
                escaped += m * row_escape[i];
                let row = &rows[i];
                for (j, &r) in row.iter().enumerate() {
                    next[j] += m * r;
                }
            }
            if escaped > tol / 10.0 {
                if half > STATIONARY_MAX_HALF_WIDTH {
                    return Err(Error::NoConvergence);
                }
                half += half / 2 + 8;
                continue 'expand;
            }
            normalize(&mut next);
            let tv = 0.5
                * cur
                    .iter()
                    .zip(next.iter())
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>();
            core::mem::swap(&mut cur, &mut next);
            if tv < tol {
                // Trim exact-zero tails before returning.
                let first = cur.iter().position(|&m| m > 0.0).unwrap_or(0);
                let last = cur.iter().rposition(|&m| m > 0.0).unwrap_or(width - 1);
                let masses = cur[first..=last].to_vec();
                return ProbVector::new(lo + first as i64, masses);
            }
        }
        return Err(Error::NoConvergence);
    }
}

fn normalize(masses: &mut [f64]) {
    let total: f64 = masses.iter().sum();
    if total > 0.0 {
        masses.iter_mut().for_each(|m| *m /= total);
    }
}

/// One-step transition probability of the additive comparator
/// Z_t = δ S_{α,θ}(Z_{t-1}) + ε_t with ε_t ~ Skellam(skl):
/// a truncated convolution of the thinning law with the innovation law,
/// expanded symmetrically until the tail contribution is negligible.
pub fn pdinar_transition_pmf(
    z_prev: i64,
    z_next: i64,
    alpha: f64,
    theta: f64,
    skl: &SkellamParams,
    delta: Sign,
) -> f64 {
    let eb = EBParams::new(z_prev, alpha, theta).expect("validated");
    let d = delta.value();
    let center = (alpha * z_prev as f64 * d as f64).round() as i64;
    let mut total = 0.0;
    // P(delta S = s) = eb_pmf(delta * s); expand around the thinning mean.
    let mut offset = 0i64;
    let mut stale = 0;
    loop {
        let candidates = if offset == 0 {
            [Some(center), None]
        } else {
            [Some(center - offset), Some(center + offset)]
        };
        let mut added = 0.0;
        for s in candidates.into_iter().flatten() {
            let w = eb_log_pmf(d * s, &eb).exp();
            if w > 0.0 {
                added += w * skellam_log_pmf(z_next - s, skl).exp();
                // Tail bound: remaining thinning mass on this side is below
                // w once w has fallen under the cutoff.
            }
            if w > 1e-16 {
                stale = 0;
            }
        }
        total += added;
        stale += 1;
        offset += 1;
        if stale > 4 && offset > 2 {
            return total;
        }
        if offset > 2048 {
            return total;
        }
    }
}

//! The three discrete laws underlying the model (Skellam, extended binomial,
//! Bessel) with exact samplers, plus the extended binomial thinning
//! operator.
//!
//! All pmfs are evaluated in log space on top of [`crate::specfun`]; the
//! linear-scale entry points simply exponentiate. Samplers are exact (no
//! normal approximations) and consume only the random stream handed in, so
//! identical stream state yields identical draws.

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;

use crate::error::Error;
use crate::specfun::{hyp_ratio, ln_gamma, log_reg_hyp_0f1, LogValue};

/// Parameters of the Skellam (Poisson difference) distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkellamParams {
    theta1: f64,
    theta2: f64,
}

impl SkellamParams {
    /// Both rates must be nonnegative. A zero rate degenerates gracefully to
    /// a (possibly negated) Poisson.
    pub fn new(theta1: f64, theta2: f64) -> Result<Self, Error> {
        if !(theta1 >= 0.0) {
            return Err(Error::Domain("theta1"));
        }
        if !(theta2 >= 0.0) {
            return Err(Error::Domain("theta2"));
        }
        Ok(SkellamParams { theta1, theta2 })
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    pub fn mean(&self) -> f64 {
        self.theta1 - self.theta2
    }

    pub fn variance(&self) -> f64 {
        self.theta1 + self.theta2
    }
}

/// Parameters of the extended binomial distribution EB(z, p, θ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EBParams {
    z: i64,
    p: f64,
    theta: f64,
}

impl EBParams {
    pub fn new(z: i64, p: f64, theta: f64) -> Result<Self, Error> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain("p"));
        }
        if !(theta > 0.0) {
            return Err(Error::Domain("theta"));
        }
        Ok(EBParams { z, p, theta })
    }

    pub fn z(&self) -> i64 {
        self.z
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Parameters of the Bessel distribution with order y >= 0 and quadratic
/// argument θ > 0; the law of the perturbation count in the thinning
/// operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselParams {
    y: i64,
    theta: f64,
}

impl BesselParams {
    pub fn new(y: i64, theta: f64) -> Result<Self, Error> {
        if y < 0 {
            return Err(Error::Domain("y"));
        }
        if !(theta > 0.0) {
            return Err(Error::Domain("theta"));
        }
        Ok(BesselParams { y, theta })
    }

    pub fn y(&self) -> i64 {
        self.y
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// log P(Z = z) for Z ~ Skellam(θ₁, θ₂), in the canonical form
/// e^{-θ₁-θ₂} (θ₁θ₂)^{max(0,-z)} θ₁^z ₀F̃₁(; |z|+1; θ₁θ₂),
/// which collapses the prefactor to θ₁^{|z|} or θ₂^{|z|} by the sign of z
/// and stays defined when one rate is zero.
pub fn skellam_log_pmf(z: i64, params: &SkellamParams) -> LogValue {
    let (t1, t2) = (params.theta1, params.theta2);
    let dominant = if z >= 0 { t1 } else { t2 };
    let za = z.unsigned_abs() as f64;
    if za > 0.0 && dominant == 0.0 {
        return LogValue::ZERO;
    }
    let hyp = log_reg_hyp_0f1(z.abs() + 1, t1 * t2)
        .expect("t1*t2 >= 0 by construction");
    let prefix = if za > 0.0 { za * dominant.ln() } else { 0.0 };
    LogValue::from_log(-t1 - t2 + prefix + hyp.log_magnitude)
}

/// P(Z = z) for Z ~ Skellam(θ₁, θ₂).
pub fn skellam_pmf(z: i64, params: &SkellamParams) -> f64 {
    skellam_log_pmf(z, params).exp()
}

/// log P(X = x) for X ~ EB(z, p, θ):
/// p^x q^{z-x} ₀F̃₁(; x+1; p²θ) ₀F̃₁(; z-x+1; q²θ) / ₀F̃₁(; z+1; θ).
pub fn eb_log_pmf(x: i64, params: &EBParams) -> LogValue {
    let (z, p, theta) = (params.z, params.p, params.theta);
    let q = 1.0 - p;
    let num1 = log_reg_hyp_0f1(x + 1, p * p * theta).expect("p^2 theta > 0");
    let num2 = log_reg_hyp_0f1(z - x + 1, q * q * theta).expect("q^2 theta > 0");
    let den = log_reg_hyp_0f1(z + 1, theta).expect("theta > 0");
    LogValue::from_log(
        x as f64 * p.ln() + (z - x) as f64 * q.ln() + num1.log_magnitude + num2.log_magnitude
            - den.log_magnitude,
    )
}

/// P(X = x) for X ~ EB(z, p, θ).
pub fn eb_pmf(x: i64, params: &EBParams) -> f64 {
    eb_log_pmf(x, params).exp()
}

/// P(W = w | W + R = z) for independent W ~ Skellam(t1, t2) and
/// R ~ Skellam(t3, t4), by the defining ratio. Test oracle for the extended
/// binomial reparametrization.
pub fn cond_pd_pmf(w: i64, z: i64, t1: f64, t2: f64, t3: f64, t4: f64) -> Result<f64, Error> {
    for (v, name) in [(t1, "t1"), (t2, "t2"), (t3, "t3"), (t4, "t4")] {
        if !(v > 0.0) {
            return Err(Error::Domain(name));
        }
    }
    let pw = skellam_log_pmf(w, &SkellamParams::new(t1, t2)?);
    let pr = skellam_log_pmf(z - w, &SkellamParams::new(t3, t4)?);
    let pz = skellam_log_pmf(z, &SkellamParams::new(t1 + t3, t2 + t4)?);
    if pz.is_zero() {
        return Err(Error::UndefinedConditional);
    }
    Ok((pw.log_magnitude + pr.log_magnitude - pz.log_magnitude).exp())
}

/// P(W = w) for W ~ Bessel(y, θ): θ^w / (w! Γ(w+y+1)) / ₀F̃₁(; y+1; θ).
/// Negative w is a structural zero.
pub fn bessel_pmf(w: i64, params: &BesselParams) -> f64 {
    if w < 0 {
        return 0.0;
    }
    bessel_log_pmf_unchecked(w, params).exp()
}

fn bessel_log_pmf_unchecked(w: i64, params: &BesselParams) -> LogValue {
    let (y, theta) = (params.y as f64, params.theta);
    let wf = w as f64;
    let norm = log_reg_hyp_0f1(params.y + 1, theta).expect("theta > 0");
    LogValue::from_log(
        wf * theta.ln() - ln_gamma(wf + 1.0) - ln_gamma(wf + y + 1.0) - norm.log_magnitude,
    )
}

/// One Poisson(λ) draw. Inversion by multiplication below mean 30; Hörmann's
/// transformed rejection (PTRS) above, which is table-free and exact.
pub fn poisson_sample<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    assert!(lambda >= 0.0, "lambda must be nonnegative");
    if lambda == 0.0 {
        return 0;
    }
    if lambda < 30.0 {
        let limit = (-lambda).exp();
        let mut product = 1.0_f64;
        let mut count = 0u64;
        loop {
            product *= rng.gen::<f64>();
            if product <= limit {
                return count;
            }
            count += 1;
        }
    }
    // PTRS: Hörmann (1993), "The transformed rejection method for generating
    // Poisson random variables".
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.gen::<f64>() - 0.5;
        let v = rng.gen::<f64>();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if (v * inv_alpha / (a / (us * us) + b)).ln() <= k * loglam - lambda - ln_gamma(k + 1.0) {
            return k as u64;
        }
    }
}

/// One Skellam draw as the difference of two independent Poisson counts.
pub fn skellam_sample<R: Rng + ?Sized>(params: &SkellamParams, rng: &mut R) -> i64 {
    let n1 = poisson_sample(params.theta1, rng);
    let n2 = poisson_sample(params.theta2, rng);
    n1 as i64 - n2 as i64
}

/// One Bessel(y, θ) draw by inversion from the mode outward. The pmf is
/// unimodal with light tails at the scales used here, so the zig-zag walk
/// terminates after a handful of pmf evaluations.
pub fn bessel_sample<R: Rng + ?Sized>(params: &BesselParams, rng: &mut R) -> u64 {
    let theta = params.theta;
    let y = params.y as f64;
    // Mode: largest w with pmf(w)/pmf(w-1) = theta/(w(w+y)) >= 1.
    let root = 0.5 * (-(y + 2.0) + (y * y + 4.0 * theta).sqrt());
    let mut mode = if root > 0.0 { root.floor() as i64 } else { 0 };
    let ratio_up = |w: i64| theta / ((w + 1) as f64 * (w as f64 + y + 1.0));
    while ratio_up(mode) > 1.0 {
        mode += 1;
    }
    while mode > 0 && ratio_up(mode - 1) < 1.0 {
        mode -= 1;
    }

    let p_mode = bessel_pmf(mode, params);
    let u = rng.gen::<f64>();
    let mut acc = p_mode;
    if u < acc {
        return mode as u64;
    }
    let mut up = mode;
    let mut p_up = p_mode;
    let mut down = mode;
    let mut p_down = p_mode;
    loop {
        let can_descend = down > 0 && p_down > 0.0;
        // Alternate sides, preferring whichever still carries mass.
        if p_up >= 1e-320 || !can_descend {
            p_up *= ratio_up(up);
            up += 1;
            acc += p_up;
            if u < acc {
                return up as u64;
            }
        }
        if can_descend {
            // pmf(w-1) = pmf(w) * w (w+y) / theta
            p_down *= down as f64 * (down as f64 + y) / theta;
            down -= 1;
            acc += p_down;
            if u < acc {
                return down as u64;
            }
        }
        if p_up < 1e-320 && (!can_descend || p_down < 1e-320) {
            // Rounding left a sliver of mass unaccounted; the mode is the
            // honest fallback.
            return mode as u64;
        }
    }
}

/// The extended binomial thinning operator S_{α,θ}(z): a signed binomial
/// contraction of z plus a symmetric trinomial perturbation whose count is
/// Bessel(|z|, θ). Conditionally on z the result is EB(z, α, θ).
pub fn eb_thinning_sample<R: Rng + ?Sized>(z: i64, alpha: f64, theta: f64, rng: &mut R) -> i64 {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must be in (0,1)");
    assert!(theta > 0.0, "theta must be positive");
    let sign = z.signum();
    let mut total = 0i64;
    for _ in 0..z.unsigned_abs() {
        if rng.gen::<f64>() < alpha {
            total += sign;
        }
    }
    let w = bessel_sample(
        &BesselParams::new(z.abs(), theta).expect("validated above"),
        rng,
    );
    let p_step = alpha * (1.0 - alpha);
    for _ in 0..w {
        let u = rng.gen::<f64>();
        if u < p_step {
            total += 1;
        } else if u < 2.0 * p_step {
            total -= 1;
        }
    }
    total
}

/// Conditional mean of EB(z, p, θ): pz.
pub fn eb_mean(params: &EBParams) -> f64 {
    params.p * params.z as f64
}

/// Conditional variance of EB(z, p, θ):
/// p(1-p)z + 2p(1-p)θ · ₀F̃₁(;z+2;θ)/₀F̃₁(;z+1;θ).
/// The signed z is correct for negative z as well: the Bessel recurrence
/// turns the ratio shift into exactly the |z| form.
pub fn eb_variance(params: &EBParams) -> f64 {
    let pq = params.p * (1.0 - params.p);
    let ratio = hyp_ratio(params.z, params.theta).expect("theta > 0");
    pq * params.z as f64 + 2.0 * pq * params.theta * ratio
}

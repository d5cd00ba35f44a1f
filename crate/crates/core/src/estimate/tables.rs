//! Precomputed log-Bessel lookup tables for the likelihood hot path.
//!
//! For fixed parameters the transition probability only ever evaluates
//! I_y(x) at four arguments (2pβ, 2(1-p)β, 2β, 2√(θ₁θ₂)) while the order y
//! ranges over a small integer window determined by the data. Building the
//! windows once turns each likelihood or score term into a handful of table
//! lookups.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::model::ModelParams;
use crate::specfun::log_bessel_i;

/// log I_y(x) over a contiguous order window [lo, hi].
pub(crate) struct BesselTable {
    lo: i64,
    logs: Vec<f64>,
}

impl BesselTable {
    pub(crate) fn build(x: f64, lo: i64, hi: i64) -> Self {
        debug_assert!(lo <= hi);
        let logs = (lo..=hi)
            .map(|y| log_bessel_i(y, x).expect("x >= 0").log_magnitude)
            .collect();
        BesselTable { lo, logs }
    }

    #[inline]
    pub(crate) fn get(&self, order: i64) -> f64 {
        let idx = order - self.lo;
        debug_assert!(idx >= 0 && (idx as usize) < self.logs.len());
        self.logs[idx as usize]
    }
}

/// Everything needed to evaluate log transition probabilities and their
/// parameter derivatives over a data window [zmin, zmax].
pub(crate) struct MesinarTables {
    pub phi: f64,
    pub p: f64,
    pub beta: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub delta: i64,
    /// Thinning numerator at argument 2pβ, orders δz_t (± margin).
    pub ta: BesselTable,
    /// Thinning numerator at argument 2(1-p)β, orders z_{t-1} - δz_t.
    pub tb: BesselTable,
    /// Thinning denominator at argument 2β, orders z_{t-1}.
    pub tc: BesselTable,
    /// Innovation Bessel at argument 2√(θ₁θ₂), orders z_t.
    pub te: BesselTable,
    /// -θ₁-θ₂, the innovation log prefactor.
    pub innov_base: f64,
    /// ½ log(θ₁/θ₂).
    pub half_log_ratio: f64,
}

/// Margin so that score recurrences (orders shifted by one) stay in-table.
const ORDER_MARGIN: i64 = 2;

impl MesinarTables {
    pub(crate) fn new(params: &ModelParams, zmin: i64, zmax: i64) -> Self {
        let (p, beta) = (params.p(), params.beta());
        let (t1, t2) = (params.theta1(), params.theta2());
        let delta = params.delta().value();

        let (amin, amax) = if delta >= 0 {
            (zmin, zmax)
        } else {
            (-zmax, -zmin)
        };
        let bmin = zmin - amax;
        let bmax = zmax - amin;

        MesinarTables {
            phi: params.phi(),
            p,
            beta,
            theta1: t1,
            theta2: t2,
            delta,
            ta: BesselTable::build(2.0 * p * beta, amin - ORDER_MARGIN, amax + ORDER_MARGIN),
            tb: BesselTable::build(
                2.0 * (1.0 - p) * beta,
                bmin - ORDER_MARGIN,
                bmax + ORDER_MARGIN,
            ),
            tc: BesselTable::build(2.0 * beta, zmin - ORDER_MARGIN, zmax + ORDER_MARGIN),
            te: BesselTable::build(2.0 * (t1 * t2).sqrt(), zmin - ORDER_MARGIN, zmax + ORDER_MARGIN),
            innov_base: -t1 - t2,
            half_log_ratio: 0.5 * (t1 / t2).ln(),
        }
    }

    /// log P(S_{p,θ}(z_prev) = δ z_next).
    #[inline]
    pub(crate) fn log_thin(&self, z_prev: i64, z_next: i64) -> f64 {
        let a = self.delta * z_next;
        self.ta.get(a) + self.tb.get(z_prev - a) - self.tc.get(z_prev)
    }

    /// log P(ε = z_next).
    #[inline]
    pub(crate) fn log_innov(&self, z_next: i64) -> f64 {
        self.innov_base + self.half_log_ratio * z_next as f64 + self.te.get(z_next)
    }
}

/// log(e^a + e^b) with -inf treated as an exact zero on either side.
#[inline]
pub(crate) fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

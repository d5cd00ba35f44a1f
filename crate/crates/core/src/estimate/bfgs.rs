//! Dense BFGS with a strong-Wolfe line search, sized for the small smooth
//! problems in this crate (3 to 5 unconstrained parameters after
//! reparameterization). Objectives may return +inf outside their sane
//! region; the line search treats such points as failed trials and
//! backtracks.

use nalgebra::{SMatrix, SVector};

#[derive(Clone)]
pub(crate) struct OptimResult<const N: usize> {
    pub x: SVector<f64, N>,
    pub f: f64,
    #[allow(dead_code)]
    pub grad_inf_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_BRACKET: usize = 30;
const MAX_ZOOM: usize = 40;

pub(crate) fn minimize<const N: usize, F>(
    mut eval: F,
    x0: SVector<f64, N>,
    max_iter: usize,
    grad_tol: f64,
) -> OptimResult<N>
where
    F: FnMut(&SVector<f64, N>) -> (f64, SVector<f64, N>),
{
    let mut x = x0;
    let (mut f, mut g) = eval(&x);
    let mut h: SMatrix<f64, N, N> = SMatrix::identity();
    let mut first_update = true;
    let mut iterations = 0;

    if !f.is_finite() {
        return OptimResult {
            x,
            f,
            grad_inf_norm: f64::INFINITY,
            iterations,
            converged: false,
        };
    }

    for _ in 0..max_iter {
        if g.amax() <= grad_tol {
            return OptimResult {
                x,
                f,
                grad_inf_norm: g.amax(),
                iterations,
                converged: true,
            };
        }
        iterations += 1;

        let mut d = -(h * g);
        let mut dg = d.dot(&g);
        if !(dg < 0.0) {
            // Curvature information went bad; restart from steepest descent.
            h = SMatrix::identity();
            first_update = true;
            d = -g;
            dg = d.dot(&g);
        }

        let ls = line_search(&mut eval, &x, f, &d, dg);
        let (alpha, f_new, g_new) = match ls {
            Some(v) => v,
            None => {
                // No acceptable step along this direction.
                return OptimResult {
                    x,
                    f,
                    grad_inf_norm: g.amax(),
                    iterations,
                    converged: g.amax() <= grad_tol,
                };
            }
        };

        let s = d * alpha;
        let y = g_new - g;
        let sy = s.dot(&y);
        if sy > 1e-10 * s.norm() * y.norm() {
            if first_update {
                h = SMatrix::identity() * (sy / y.dot(&y));
                first_update = false;
            }
            let rho = 1.0 / sy;
            let a = SMatrix::<f64, N, N>::identity() - (s * y.transpose()) * rho;
            h = a * h * a.transpose() + (s * s.transpose()) * rho;
        }

        x += s;
        let df = f - f_new;
        f = f_new;
        g = g_new;

        if df.abs() <= 1e-14 * (1.0 + f.abs()) && g.amax() <= grad_tol.max(1e-12) {
            break;
        }
    }

    let converged = g.amax() <= grad_tol;
    OptimResult {
        x,
        f,
        grad_inf_norm: g.amax(),
        iterations,
        converged,
    }
}

/// Strong-Wolfe line search (bracket then zoom). Returns (alpha, f, grad)
/// at the accepted point, or None if no step with sufficient decrease was
/// found.
fn line_search<const N: usize, F>(
    eval: &mut F,
    x: &SVector<f64, N>,
    f0: f64,
    d: &SVector<f64, N>,
    dg0: f64,
) -> Option<(f64, f64, SVector<f64, N>)>
where
    F: FnMut(&SVector<f64, N>) -> (f64, SVector<f64, N>),
{
    let mut probe = |alpha: f64| {
        let (f, g) = eval(&(x + d * alpha));
        let slope = g.dot(d);
        (f, g, slope)
    };

    let mut alpha_prev = 0.0;
    let mut f_prev = f0;
    let mut slope_prev = dg0;
    let mut alpha = 1.0;

    for i in 0..MAX_BRACKET {
        let (f_a, g_a, slope_a) = probe(alpha);
        if !f_a.is_finite() {
            // Stepped out of the sane region; pull the trial point back in.
            alpha = 0.5 * (alpha_prev + alpha);
            if alpha < 1e-16 {
                return None;
            }
            continue;
        }
        if f_a > f0 + C1 * alpha * dg0 || (i > 0 && f_a >= f_prev) {
            return zoom(
                &mut probe,
                f0,
                dg0,
                alpha_prev,
                f_prev,
                slope_prev,
                alpha,
            );
        }
        if slope_a.abs() <= -C2 * dg0 {
            return Some((alpha, f_a, g_a));
        }
        if slope_a >= 0.0 {
            return zoom(&mut probe, f0, dg0, alpha, f_a, slope_a, alpha_prev);
        }
        alpha_prev = alpha;
        f_prev = f_a;
        slope_prev = slope_a;
        alpha = (alpha * 2.5).min(1e6);
    }
    None
}

/// Zoom phase: lo satisfies the Armijo condition with the lowest f seen,
/// hi is the other bracket end.
fn zoom<const N: usize>(
    probe: &mut impl FnMut(f64) -> (f64, SVector<f64, N>, f64),
    f0: f64,
    dg0: f64,
    mut lo: f64,
    mut f_lo: f64,
    mut slope_lo: f64,
    mut hi: f64,
) -> Option<(f64, f64, SVector<f64, N>)> {
    for _ in 0..MAX_ZOOM {
        let alpha = 0.5 * (lo + hi);
        if (hi - lo).abs() < 1e-14 * lo.abs().max(1.0) {
            break;
        }
        let (f_a, g_a, slope_a) = probe(alpha);
        if !f_a.is_finite() || f_a > f0 + C1 * alpha * dg0 || f_a >= f_lo {
            hi = alpha;
            continue;
        }
        if slope_a.abs() <= -C2 * dg0 {
            return Some((alpha, f_a, g_a));
        }
        if slope_a * (hi - lo) >= 0.0 {
            hi = lo;
        }
        lo = alpha;
        f_lo = f_a;
        slope_lo = slope_a;
    }
    // The curvature condition never held on a shrinking interval; accept the
    // best Armijo point if it makes progress.
    let _ = slope_lo;
    if lo > 0.0 && f_lo < f0 {
        let (f_a, g_a, _) = probe(lo);
        if f_a.is_finite() {
            return Some((lo, f_a, g_a));
        }
    }
    None
}

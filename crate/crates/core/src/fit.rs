//! Damped least-squares fitting for all model families: density model,
//! spectral model, single/double exponentials, and the saturation curve.
//!
//! The solver is a Levenberg-style damped Gauss-Newton iteration with a
//! forward-difference Jacobian. Parameter uncertainties come from the
//! inverse normal-equations matrix scaled by the reduced residual sum of
//! squares.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::models::{density_model, spectral_model, steady_state_level, DensityModelParams, SpectralModelParams};
use crate::{Error, Result};

const MAX_ITERATIONS: usize = 200;
const RSS_TOL: f64 = 1e-10;
const GRAD_TOL: f64 = 1e-10;
const JACOBIAN_STEP: f64 = 1e-6;

/// Outcome of a least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Parameter names, in solver order.
    pub names: Vec<&'static str>,
    /// Fitted parameter values.
    pub values: Vec<f64>,
    /// One-sigma uncertainties.
    pub sigmas: Vec<f64>,
    /// Weighted residual sum of squares at the solution.
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Diagnostic flags, e.g. poorly separated exponential time scales.
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| *n == name).map(|i| self.values[i])
    }

    pub fn sigma(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| *n == name).map(|i| self.sigmas[i])
    }
}

/// One data point: abscissa, ordinate, weight.
pub type Point = (f64, f64, f64);

/// Poisson-motivated default weights, 1/max(y, 1).
pub fn default_weights(xy: &[(f64, f64)]) -> Vec<Point> {
    xy.iter().map(|&(x, y)| (x, y, 1.0 / y.max(1.0))).collect()
}

/// Fits `model(params, x)` to weighted data starting from `init`.
///
/// Damping schedule: λ ×10 on a rejected step, ÷10 on acceptance.
/// Convergence when the relative RSS change drops below 1e-10 or the
/// gradient norm below 1e-10; hard stop with an error after 200
/// iterations.
pub fn fit_curve<F>(model: F, data: &[Point], init: &[f64], names: &[&'static str]) -> Result<FitResult>
where
    F: Fn(&[f64], f64) -> f64,
{
    let n = init.len();
    let m = data.len();
    if names.len() != n {
        return Err(Error::Domain("one name per parameter required"));
    }
    if m < n + 2 {
        return Err(Error::InsufficientData("need at least 2 more points than free parameters"));
    }
    for &(x, y, w) in data {
        if !(x.is_finite() && y.is_finite() && w.is_finite() && w >= 0.0) {
            return Err(Error::Domain("data points must be finite with nonnegative weights"));
        }
    }

    let rss_of = |p: &[f64]| -> f64 {
        data.iter()
            .map(|&(x, y, w)| {
                let r = y - model(p, x);
                w * r * r
            })
            .sum()
    };

    let mut p: Vec<f64> = init.to_vec();
    let mut rss = rss_of(&p);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=MAX_ITERATIONS {
        iterations = iter;
        let jac = forward_jacobian(&model, &p, data);
        let (a, g) = normal_equations(&model, &jac, &p, data);

        let gnorm = math::sqrt(g.iter().map(|v| v * v).sum::<f64>());
        if gnorm < GRAD_TOL {
            converged = true;
            break;
        }

        let mut accepted = false;
        for _ in 0..40 {
            let mut damped = a.clone();
            for j in 0..n {
                // Marquardt scaling of the diagonal
                damped[j * n + j] += lambda * a[j * n + j].max(1e-300);
            }
            match solve(&damped, &g, n) {
                Some(step) => {
                    let trial: Vec<f64> = p.iter().zip(&step).map(|(pi, si)| pi + si).collect();
                    let trial_rss = rss_of(&trial);
                    if trial_rss.is_finite() && trial_rss < rss {
                        let rel = (rss - trial_rss) / rss.max(1e-300);
                        p = trial;
                        rss = trial_rss;
                        lambda = (lambda / 10.0).max(1e-14);
                        accepted = true;
                        if rel < RSS_TOL {
                            converged = true;
                        }
                        break;
                    }
                    lambda *= 10.0;
                }
                None => {
                    lambda *= 10.0;
                }
            }
            if lambda > 1e14 {
                break;
            }
        }
        if !accepted {
            if lambda > 1e14 && rss_of(&p) == rss {
                // no descent direction left: treat the point as a local
                // minimum only if the gradient check above did not fire
                converged = gnorm < 1e-6;
            }
            break;
        }
        if converged {
            break;
        }
    }

    let jac = forward_jacobian(&model, &p, data);
    let (a, _) = normal_equations(&model, &jac, &p, data);
    let sigmas = uncertainties(&a, rss, m, n)?;

    let result = FitResult {
        names: names.to_vec(),
        values: p,
        sigmas,
        rss,
        iterations,
        converged,
        warnings: Vec::new(),
    };
    if !converged {
        return Err(Error::NonConvergence(Box::new(result)));
    }
    Ok(result)
}

/// Forward-difference Jacobian of the residuals' model part, m×n
/// row-major; step 1e-6 relative to each parameter.
pub(crate) fn forward_jacobian<F>(model: &F, p: &[f64], data: &[Point]) -> Vec<f64>
where
    F: Fn(&[f64], f64) -> f64,
{
    let n = p.len();
    let m = data.len();
    let mut jac = vec![0.0; m * n];
    let base: Vec<f64> = data.iter().map(|&(x, _, _)| model(p, x)).collect();
    let mut pp = p.to_vec();
    for j in 0..n {
        let h = JACOBIAN_STEP * math::abs(p[j]).max(1e-6);
        pp[j] = p[j] + h;
        for (i, &(x, _, _)) in data.iter().enumerate() {
            jac[i * n + j] = (model(&pp, x) - base[i]) / h;
        }
        pp[j] = p[j];
    }
    jac
}

/// A = JᵀWJ (n×n) and g = JᵀW·r (n).
fn normal_equations<F>(model: &F, jac: &[f64], p: &[f64], data: &[Point]) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(&[f64], f64) -> f64,
{
    let n = p.len();
    let mut a = vec![0.0; n * n];
    let mut g = vec![0.0; n];
    for (i, &(x, y, w)) in data.iter().enumerate() {
        let r = y - model(p, x);
        for j in 0..n {
            let jj = jac[i * n + j];
            g[j] += w * jj * r;
            for k in j..n {
                a[j * n + k] += w * jj * jac[i * n + k];
            }
        }
    }
    for j in 0..n {
        for k in 0..j {
            a[j * n + k] = a[k * n + j];
        }
    }
    (a, g)
}

/// Gaussian elimination with partial pivoting; None when singular.
fn solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if math::abs(m[row * n + col]) > math::abs(m[pivot * n + col]) {
                pivot = row;
            }
        }
        if math::abs(m[pivot * n + col]) < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            rhs.swap(col, pivot);
        }
        let d = m[col * n + col];
        for row in col + 1..n {
            let f = m[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row * n + k] -= f * m[col * n + k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = rhs[col];
        for k in col + 1..n {
            s -= m[col * n + k] * x[k];
        }
        x[col] = s / m[col * n + col];
    }
    Some(x)
}

/// Inverts the normal matrix and scales by reduced RSS.
fn uncertainties(a: &[f64], rss: f64, m: usize, n: usize) -> Result<Vec<f64>> {
    let dof = (m - n).max(1) as f64;
    let scale = rss / dof;
    let mut sigmas = vec![0.0; n];
    // invert column by column
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = solve(a, &e, n).ok_or(Error::DegenerateFit("singular normal matrix"))?;
        let var = col[j] * scale;
        sigmas[j] = if var > 0.0 { math::sqrt(var) } else { 0.0 };
    }
    Ok(sigmas)
}

// ---------------------------------------------------------------------------
// Model-family front ends with the documented initial-guess strategies.
// ---------------------------------------------------------------------------

/// Fits the density model P(b) = A·S(ηb)/(ηb) to (b, y) data.
///
/// A starts at max(y); η from a coarse grid over [0.01, 1] with A
/// profiled out linearly, which avoids the trivial local minimum at
/// η → 0.
pub fn fit_density_model(data: &[Point]) -> Result<FitResult> {
    let model = |p: &[f64], b: f64| {
        let params = DensityModelParams { amplitude_a: math::abs(p[0]).max(1e-12), eta: clamp_eta(p[1]) };
        density_model(b, &params).unwrap_or(f64::NAN)
    };
    let eta0 = grid_scan_eta(data, |eta, b| {
        let params = DensityModelParams { amplitude_a: 1.0, eta };
        density_model(b, &params).unwrap_or(f64::NAN)
    });
    let a0 = profiled_amplitude(data, |b| {
        let params = DensityModelParams { amplitude_a: 1.0, eta: eta0 };
        density_model(b, &params).unwrap_or(f64::NAN)
    });
    fit_curve(model, data, &[a0, eta0], &["amplitude_a", "eta"])
}

/// Fits the spectral model with fixed (b₀, γ′) to (Δ, y) data; free
/// parameters are (A, η, δ). δ starts at the argmax of the data.
pub fn fit_spectral_model(data: &[Point], b0: f64, gamma_prime_mhz: f64) -> Result<FitResult> {
    let make = |a: f64, eta: f64, delta: f64| SpectralModelParams {
        amplitude_a: a,
        eta,
        b0,
        delta_shift_mhz: delta,
        gamma_prime_mhz,
    };
    let model = move |p: &[f64], x: f64| {
        spectral_model(x, &make(math::abs(p[0]).max(1e-12), clamp_eta(p[1]), p[2])).unwrap_or(f64::NAN)
    };
    let delta0 = data
        .iter()
        .fold((f64::NEG_INFINITY, 0.0), |(best, arg), &(x, y, _)| {
            if y > best { (y, x) } else { (best, arg) }
        })
        .1;
    let eta0 = grid_scan_eta(data, |eta, x| spectral_model(x, &make(1.0, eta, delta0)).unwrap_or(f64::NAN));
    let a0 = profiled_amplitude(data, |x| spectral_model(x, &make(1.0, eta0, delta0)).unwrap_or(f64::NAN));
    fit_curve(model, data, &[a0, eta0, delta0], &["amplitude_a", "eta", "delta_shift_mhz"])
}

/// Fits the saturation curve level = scale·(I/i_eff)/(1+I/i_eff).
pub fn fit_saturation(data: &[Point]) -> Result<FitResult> {
    let model = |p: &[f64], x: f64| steady_state_level(x, math::abs(p[0]).max(1e-12), math::abs(p[1]).max(1e-12)).unwrap_or(f64::NAN);
    let ymax = data.iter().fold(0.0f64, |m, &(_, y, _)| m.max(y));
    // i_eff guess: abscissa closest to half the observed maximum
    let mut i0 = data.last().map(|&(x, _, _)| x).unwrap_or(1.0);
    let mut best = f64::INFINITY;
    for &(x, y, _) in data {
        let d = math::abs(y - 0.5 * ymax);
        if d < best && x > 0.0 {
            best = d;
            i0 = x;
        }
    }
    fit_curve(model, data, &[1.5 * ymax, i0], &["scale", "i_eff_mw_cm2"])
}

/// Fits y(t) = a·e^{−t/τ} + c to (t, y) data.
pub fn fit_single_exponential(data: &[Point]) -> Result<FitResult> {
    if data.len() < 5 {
        return Err(Error::InsufficientData("single-exponential fit needs at least 5 points"));
    }
    check_nondegenerate(data)?;
    let model = |p: &[f64], t: f64| p[0] * math::exp(-t / math::abs(p[1]).max(1e-12)) + p[2];
    let (a0, tau0, c0) = exp_init(data);
    fit_curve(model, data, &[a0, tau0, c0], &["amplitude", "tau", "offset"])
}

/// Fits y(t) = a₁·e^{−t/τ₁} + a₂·e^{−t/τ₂} + c, returning τ₁ < τ₂.
///
/// τ₂/τ₁ below 1.5 is flagged as poorly separated.
pub fn fit_double_exponential(data: &[Point], init: Option<[f64; 5]>) -> Result<FitResult> {
    if data.len() < 8 {
        return Err(Error::InsufficientData("double-exponential fit needs at least 8 points"));
    }
    if data.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Domain("abscissas must be strictly increasing"));
    }
    check_nondegenerate(data)?;
    let model = |p: &[f64], t: f64| {
        p[0] * math::exp(-t / math::abs(p[1]).max(1e-12))
            + p[2] * math::exp(-t / math::abs(p[3]).max(1e-12))
            + p[4]
    };
    let start = match init {
        Some(v) => v.to_vec(),
        None => {
            let (a0, tau0, c0) = exp_init(data);
            // split the single-exponential guess into a fast and a slow part
            vec![a0 * 0.7, tau0 * 0.4, a0 * 0.3, tau0 * 2.0, c0]
        }
    };
    let names = ["a1", "tau1", "a2", "tau2", "offset"];
    let mut result = fit_curve(model, data, &start, &names)?;
    result.values[1] = math::abs(result.values[1]);
    result.values[3] = math::abs(result.values[3]);
    if result.values[1] > result.values[3] {
        result.values.swap(0, 2);
        result.values.swap(1, 3);
        result.sigmas.swap(0, 2);
        result.sigmas.swap(1, 3);
    }
    let ratio = result.values[3] / result.values[1].max(1e-300);
    if ratio < 1.5 {
        result.warnings.push(String::from("time constants poorly separated (ratio < 1.5)"));
    }
    Ok(result)
}

fn check_nondegenerate(data: &[Point]) -> Result<()> {
    let mean = data.iter().map(|&(_, y, _)| y).sum::<f64>() / data.len() as f64;
    let var = data.iter().map(|&(_, y, _)| (y - mean) * (y - mean)).sum::<f64>() / data.len() as f64;
    if var <= 1e-20 * mean * mean {
        return Err(Error::DegenerateFit("constant input carries no decay information"));
    }
    Ok(())
}

/// Amplitude, time constant, and offset guesses from the tail of the data.
fn exp_init(data: &[Point]) -> (f64, f64, f64) {
    let m = data.len();
    let tail = &data[m - (m / 10).max(2)..];
    let c0 = tail.iter().map(|&(_, y, _)| y).sum::<f64>() / tail.len() as f64;
    let (t_first, y_first, _) = data[0];
    let a0 = (y_first - c0).max(1e-6);
    // log-linear slope between the first point and the point that has
    // decayed to ~1/e of the initial excess
    let target = c0 + a0 / core::f64::consts::E;
    let mut tau0 = (data[m - 1].0 - t_first) / 2.0;
    for &(t, y, _) in data {
        if y <= target {
            if t > t_first {
                tau0 = t - t_first;
            }
            break;
        }
    }
    (a0, tau0.max(1e-6), c0)
}

fn clamp_eta(raw: f64) -> f64 {
    math::abs(raw).clamp(1e-6, 1.0)
}

/// Coarse 1-D scan of η over [0.01, 1] with the amplitude profiled out.
fn grid_scan_eta<S>(data: &[Point], shape: S) -> f64
where
    S: Fn(f64, f64) -> f64,
{
    let mut best_eta = 0.1;
    let mut best_rss = f64::INFINITY;
    let steps = 60;
    for i in 0..=steps {
        // log spacing from 0.01 to 1
        let eta = 0.01 * math::pow(100.0, i as f64 / steps as f64);
        let a = profiled_amplitude(data, |x| shape(eta, x));
        let rss: f64 = data
            .iter()
            .map(|&(x, y, w)| {
                let r = y - a * shape(eta, x);
                w * r * r
            })
            .sum();
        if rss.is_finite() && rss < best_rss {
            best_rss = rss;
            best_eta = eta;
        }
    }
    best_eta
}

/// Weighted linear solve for the amplitude of a fixed shape function.
fn profiled_amplitude<S>(data: &[Point], shape: S) -> f64
where
    S: Fn(f64) -> f64,
{
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y, w) in data {
        let s = shape(x);
        if s.is_finite() {
            num += w * y * s;
            den += w * s * s;
        }
    }
    if den > 0.0 {
        num / den
    } else {
        1.0
    }
}

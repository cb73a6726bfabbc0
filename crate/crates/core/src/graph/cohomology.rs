use std::sync::Arc;

use crate::error::{Error, Result};
use crate::maps::{DriverState, FiberMap, HyperbolicDriver, Multiplier, StateMultiplier};

const SUP_SAMPLES: usize = 64;

/// Factor multiplier `g` cohomologous to a state multiplier `g_hat`:
/// `log g_hat = log g o project + b - b o inverse`, with `b` the truncated Bowen series.
#[derive(Debug, Clone)]
pub struct ReducedMultiplier {
    driver: HyperbolicDriver,
    ghat: StateMultiplier,
    g: Multiplier,
    depth: usize,
    truncation_bound: f64,
    b_hat_sup: f64,
    sample_sup: f64,
}

impl ReducedMultiplier {
    pub fn g(&self) -> &Multiplier {
        &self.g
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `Hol C r^{alpha K} / (1 - r^alpha)`.
    pub fn truncation_bound(&self) -> f64 {
        self.truncation_bound
    }

    /// Bound on `|coboundary_residual|`: one truncation tail from each series.
    pub fn residual_bound(&self) -> f64 {
        2.0 * self.truncation_bound
    }

    /// Sampled sup of the truncated series plus the truncation bound.
    pub fn b_hat_sup(&self) -> f64 {
        self.b_hat_sup
    }

    pub fn sample_sup(&self) -> f64 {
        self.sample_sup
    }

    pub fn b_hat(&self, p: DriverState) -> f64 {
        b_hat(&self.driver, &self.ghat, p, self.depth)
    }

    pub fn log_g(&self, theta: f64) -> f64 {
        log_g_reduced(&self.driver, &self.ghat, theta, self.depth)
    }

    /// `log g_hat(p) - log g(project p) - b(p) + b(inverse p)`.
    pub fn coboundary_residual(&self, p: DriverState) -> f64 {
        self.ghat.log_eval(p) - self.log_g(self.driver.project(p)) - self.b_hat(p) + self.b_hat(self.driver.inverse(p))
    }
}

fn b_hat(driver: &HyperbolicDriver, ghat: &StateMultiplier, p: DriverState, k: usize) -> f64 {
    let mut x = p;
    let mut y = driver.section(driver.project(p));
    let mut sum = 0.0;
    for n in 0..=k {
        if n > 0 {
            x = driver.inverse(x);
            y = driver.inverse(y);
        }
        sum += ghat.log_eval(x) - ghat.log_eval(y);
    }
    sum
}

/// `log g(theta) = L(sec theta) + sum_{n=1..K} [L(inv^n sec theta) - L(inv^{n-1} sec S theta)]`.
fn log_g_reduced(driver: &HyperbolicDriver, ghat: &StateMultiplier, theta: f64, k: usize) -> f64 {
    let mut x = driver.section(theta);
    let mut y = driver.section(driver.factor_map().image(theta));
    let mut sum = ghat.log_eval(x);
    for n in 1..=k {
        x = driver.inverse(x);
        if n > 1 {
            y = driver.inverse(y);
        }
        sum += ghat.log_eval(x) - ghat.log_eval(y);
    }
    sum
}

/// Reduces `g_hat` to a factor multiplier through the Bowen series truncated at `k`.
pub fn reduce_multiplier(driver: &HyperbolicDriver, ghat: &StateMultiplier, k: usize) -> Result<ReducedMultiplier> {
    let holder = ghat.holder().ok_or(Error::NonHolder)?;
    if k < 1 {
        return Err(Error::InvalidParameter("truncation depth must be >= 1".into()));
    }
    let ra = driver.contraction().powf(holder.exponent);
    let truncation_bound = holder.constant * driver.stable_constant() * ra.powi(k as i32) / (1.0 - ra);

    let mut sample_sup = 0.0f64;
    for i in 0..SUP_SAMPLES {
        for j in 0..SUP_SAMPLES {
            let p = DriverState::new(
                (i as f64 + 0.5) / SUP_SAMPLES as f64,
                (j as f64 + 0.5) / SUP_SAMPLES as f64,
            );
            sample_sup = sample_sup.max(b_hat(driver, ghat, p, k).abs());
        }
    }

    let (d, gh) = (driver.clone(), ghat.clone());
    let g = Multiplier::closed_form(
        format!("reduced({}, K={k})", ghat.label()),
        Arc::new(move |t: f64| log_g_reduced(&d, &gh, t, k).exp()),
        None,
        None,
    )?;
    Ok(ReducedMultiplier {
        driver: driver.clone(),
        ghat: ghat.clone(),
        g,
        depth: k,
        truncation_bound,
        b_hat_sup: sample_sup + truncation_bound,
        sample_sup,
    })
}

/// `phi_hat_n(p)`: fold `y <- g_hat(inv^k p) h(y)` for `k = n, ..., 1` from `y = a`.
pub fn twosided_pullback(
    driver: &HyperbolicDriver,
    ghat: &StateMultiplier,
    fiber: &FiberMap,
    p: DriverState,
    n: usize,
) -> f64 {
    let orbit = driver.backward_orbit(p, n);
    let mut y = fiber.a();
    for k in (1..=n).rev() {
        y = ghat.eval(orbit[k]) * fiber.h(y);
    }
    y
}

/// `log phi_hat_n(p)`, folded as `log y <- log g_hat + log y + log(h(y)/y)`.
pub fn twosided_pullback_log(
    driver: &HyperbolicDriver,
    ghat: &StateMultiplier,
    fiber: &FiberMap,
    p: DriverState,
    n: usize,
) -> f64 {
    let orbit = driver.backward_orbit(p, n);
    let mut ly = fiber.a().ln();
    for k in (1..=n).rev() {
        ly += ghat.log_eval(orbit[k]) + fiber.log_ratio(ly.exp());
    }
    ly
}

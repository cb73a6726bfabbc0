use serde::Serialize;

use crate::diagnostics::AlphaSchedule;
use crate::graph::pullback_log;
use crate::maps::DrivenSystem;

/// Float slack allowed on every checked margin.
pub const MARGIN_SLACK: f64 = -1e-12;

/// Two-sided derivative bound and, when its precondition holds, the
/// summability bound for the backward values `x_{-i}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionReport {
    pub theta: f64,
    pub n: usize,
    pub x: f64,
    /// `x_0, x_{-1}, ..., x_{-n}` with `x_{-n} = x`.
    pub backward: Vec<f64>,
    /// `log(f'(x) / f'(0)) = sum log h'(x_{-i})`.
    pub log_ratio: f64,
    /// `log_ratio + a_h sum x_{-i}`.
    pub lower_margin: f64,
    /// `-log_ratio`.
    pub upper_margin: f64,
    pub precondition: bool,
    /// Relative margins of `sum x_{-i} <= C_n x_0 sum 1/g_i <= A_n`, if checked.
    pub sum_margin: Option<f64>,
    pub bound_margin: Option<f64>,
    pub pass: bool,
}

fn rel_margin(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs) / rhs.abs().max(f64::MIN_POSITIVE)
}

pub fn check_branch_distortion(
    sys: &DrivenSystem,
    theta: f64,
    n: usize,
    sched: &AlphaSchedule,
    x: f64,
) -> DistortionReport {
    let fiber = sys.fiber();
    let orbit = sys.base().orbit(theta, n);
    // backward[i] = x_{-i}
    let mut backward = vec![0.0; n + 1];
    backward[n] = x;
    for i in (1..=n).rev() {
        backward[i - 1] = sys.g(orbit[i]) * fiber.h(backward[i]);
    }
    let sum_x: f64 = backward[1..].iter().sum();
    let log_ratio: f64 = backward[1..].iter().map(|&v| fiber.deriv(v).ln()).sum();
    let lower_margin = log_ratio + fiber.a_h() * sum_x;
    let upper_margin = -log_ratio;

    // log g_i for i = 1..n
    let mut log_gi = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &p in &orbit[1..] {
        acc += sys.mult().log_eval(p);
        log_gi.push(acc);
    }
    let x0 = backward[0];
    let log_cn = sched.log_c_n(fiber, n);
    let precondition = x0 > 0.0
        && log_gi
            .iter()
            .enumerate()
            .all(|(k, &lg)| x0.ln() <= -log_cn + sched.alpha(k + 1).ln() + lg);
    let (sum_margin, bound_margin) = if precondition {
        let middle: f64 = log_gi.iter().map(|&lg| (log_cn + x0.ln() - lg).exp()).sum();
        (Some(rel_margin(sum_x, middle)), Some(rel_margin(middle, sched.a_n(n))))
    } else {
        (None, None)
    };
    let pass = lower_margin >= MARGIN_SLACK
        && upper_margin >= MARGIN_SLACK
        && sum_margin.map_or(true, |m| m >= MARGIN_SLACK)
        && bound_margin.map_or(true, |m| m >= MARGIN_SLACK);
    DistortionReport {
        theta,
        n,
        x,
        backward,
        log_ratio,
        lower_margin,
        upper_margin,
        precondition,
        sum_margin,
        bound_margin,
        pass,
    }
}

/// `phi_n(theta) > C_inf^{-1} alpha_i g_i(theta)` for some `i`, checked in logs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub theta: f64,
    pub n: usize,
    pub log_phi: f64,
    /// Index with the largest margin.
    pub witness: usize,
    pub margin: f64,
    pub pass: bool,
}

pub fn check_graph_lower_bound(sys: &DrivenSystem, theta: f64, n: usize, sched: &AlphaSchedule) -> LowerBoundReport {
    let log_phi = pullback_log(sys, theta, n);
    let log_c_inf = sched.log_c_inf(sys.fiber());
    let orbit = sys.base().orbit(theta, n);
    let mut acc = 0.0;
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &y) in orbit.iter().enumerate().take(n + 1).skip(1) {
        acc += sys.mult().log_eval(y);
        let m = log_phi - (-log_c_inf + sched.alpha(i).ln() + acc);
        if m > best.1 {
            best = (i, m);
        }
    }
    LowerBoundReport {
        theta,
        n,
        log_phi,
        witness: best.0,
        margin: best.1,
        pass: best.1 > MARGIN_SLACK,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn single_step_is_the_defining_bound() {
        let sys = presets::pc42();
        let s = AlphaSchedule::default();
        for x in [0.0, 0.5, 3.0, 8.0] {
            let r = check_branch_distortion(&sys, 0.3, 1, &s, x);
            assert!((r.log_ratio - sys.fiber().deriv(x).ln()).abs() < 1e-15);
            assert!(r.pass);
        }
    }

    #[test]
    fn t3_middle_fixed_point() {
        let sys = presets::t3();
        let r = check_branch_distortion(&sys, 0.5, 10, &AlphaSchedule::default(), 15.0);
        assert!(r.pass);
        assert!(r.lower_margin >= 0.0 && r.upper_margin >= 0.0);
        assert!(r.backward[0] < r.backward[5]);
        let c = check_graph_lower_bound(&sys, 0.5, 40, &AlphaSchedule::default());
        assert!(c.pass);
    }

    #[test]
    fn precondition_path() {
        let sys = presets::pc42();
        let s = AlphaSchedule::default();
        let mut hit = 0;
        for i in 0..200 {
            let t = (i as f64 + 0.5) / 200.0;
            let r = check_branch_distortion(&sys, t, 20, &s, 1e-9);
            assert!(r.pass, "{r:?}");
            hit += r.precondition as usize;
        }
        assert!(hit > 0);
    }

    #[test]
    fn lower_bound_at_depth_one() {
        let sys = presets::pc42();
        let r = check_graph_lower_bound(&sys, 0.3, 1, &AlphaSchedule::default());
        assert!(r.pass);
        assert_eq!(r.witness, 1);
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{check_branch_distortion, check_graph_lower_bound, AlphaSchedule};
use crate::maps::DrivenSystem;

/// Worst margins over a seeded sweep of `theta x depth x start value`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub points: usize,
    pub depths: Vec<usize>,
    /// Start values as fractions of `a`.
    pub start_fractions: Vec<f64>,
    pub distortion_checks: usize,
    pub distortion_failures: usize,
    pub precondition_checks: usize,
    pub lower_bound_checks: usize,
    pub lower_bound_failures: usize,
    pub worst_lower_margin: f64,
    pub worst_upper_margin: f64,
    pub worst_sum_margin: f64,
    pub worst_lower_bound_margin: f64,
}

#[derive(Default)]
struct Acc {
    checks: usize,
    failures: usize,
    precondition: usize,
    lb_checks: usize,
    lb_failures: usize,
    lower: f64,
    upper: f64,
    sum: f64,
    lb: f64,
}

impl Acc {
    fn empty() -> Self {
        Self {
            lower: f64::INFINITY,
            upper: f64::INFINITY,
            sum: f64::INFINITY,
            lb: f64::INFINITY,
            ..Default::default()
        }
    }

    fn merge(mut self, o: Self) -> Self {
        self.checks += o.checks;
        self.failures += o.failures;
        self.precondition += o.precondition;
        self.lb_checks += o.lb_checks;
        self.lb_failures += o.lb_failures;
        self.lower = self.lower.min(o.lower);
        self.upper = self.upper.min(o.upper);
        self.sum = self.sum.min(o.sum);
        self.lb = self.lb.min(o.lb);
        self
    }
}

pub fn distortion_sweep(
    sys: &DrivenSystem,
    points: usize,
    depths: &[usize],
    start_fractions: &[f64],
    sched: &AlphaSchedule,
    seed: u64,
) -> SweepSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let thetas: Vec<f64> = (0..points).map(|_| rng.random::<f64>()).collect();
    let acc = thetas
        .par_iter()
        .map(|&t| {
            let mut acc = Acc::empty();
            for &n in depths {
                for &f in start_fractions {
                    let r = check_branch_distortion(sys, t, n, sched, f * sys.a());
                    acc.checks += 1;
                    acc.failures += !r.pass as usize;
                    acc.lower = acc.lower.min(r.lower_margin);
                    acc.upper = acc.upper.min(r.upper_margin);
                    if let (Some(a), Some(b)) = (r.sum_margin, r.bound_margin) {
                        acc.precondition += 1;
                        acc.sum = acc.sum.min(a.min(b));
                    }
                }
                let c = check_graph_lower_bound(sys, t, n, sched);
                acc.lb_checks += 1;
                acc.lb_failures += !c.pass as usize;
                acc.lb = acc.lb.min(c.margin);
            }
            acc
        })
        .reduce(Acc::empty, Acc::merge);
    SweepSummary {
        points,
        depths: depths.to_vec(),
        start_fractions: start_fractions.to_vec(),
        distortion_checks: acc.checks,
        distortion_failures: acc.failures,
        precondition_checks: acc.precondition,
        lower_bound_checks: acc.lb_checks,
        lower_bound_failures: acc.lb_failures,
        worst_lower_margin: acc.lower,
        worst_upper_margin: acc.upper,
        worst_sum_margin: acc.sum,
        worst_lower_bound_margin: acc.lb,
    }
}

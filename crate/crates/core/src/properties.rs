//! Pathwise property suites over randomized instances.
//!
//! Every trial samples a wall and a noise realization, runs the coupled
//! processes the inequalities speak about, and records the first site and
//! step where any of them fails.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    exclusion, le_tol, nu_sandwich_check, step_w2, step_w3, DynamicsError, Init, Process,
    SiteRule,
};
use crate::lattice::{Kernel, Stencil, Torus};
use crate::noise::{derive_key, NoiseStream, SymmetricLaw};
use crate::wall::{sample_wall, WallField, WallSpec};

pub const WALL_DOMINATION: &str = "monotonicity/wall-domination";
pub const WALL_ORDER: &str = "monotonicity/wall-order";
pub const INITIAL_ORDER: &str = "monotonicity/initial-order";
pub const HAT_CHAIN: &str = "chain/hat0-hat-free";
pub const WI_STEP: &str = "wi/one-step";
pub const WI_ITERATED: &str = "wi/iterated";
pub const NU_SANDWICH: &str = "nu/sandwich";
pub const W2_W3: &str = "identity/w2-w3";

/// Every suite, in the order they are checked within a trial.
pub const SUITES: [&str; 8] = [
    WALL_DOMINATION,
    WALL_ORDER,
    INITIAL_ORDER,
    HAT_CHAIN,
    WI_STEP,
    WI_ITERATED,
    NU_SANDWICH,
    W2_W3,
];

/// Where the randomized instances come from.
#[derive(Debug, Clone)]
pub struct PropertySetup {
    pub kernel: Kernel,
    pub torus: Torus,
    pub steps: u64,
    pub noise: SymmetricLaw,
    pub wall: WallSpec,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub property: &'static str,
    pub trial: u64,
    pub seed: u64,
    pub site: usize,
    pub step: u64,
    /// Amount by which the inequality failed.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub trials: u64,
    /// Number of trials each suite ran on.
    pub instances: BTreeMap<&'static str, u64>,
    /// First violation of each suite within each failing trial, ordered
    /// by trial and then by suite.
    pub violations: Vec<Violation>,
    /// Largest `|step_w2 - step_w3|` seen.
    pub max_w2_w3_diff: f64,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

struct Recorder {
    trial: u64,
    seed: u64,
    found: Vec<Violation>,
}

impl Recorder {
    /// Records `lhs <= rhs` failing, unless this property already failed.
    fn check(&mut self, property: &'static str, step: u64, site: usize, lhs: f64, rhs: f64) {
        if le_tol(lhs, rhs) || self.found.iter().any(|v| v.property == property) {
            return;
        }
        self.found.push(Violation {
            property,
            trial: self.trial,
            seed: self.seed,
            site,
            step,
            excess: lhs - rhs,
        });
    }
}

/// `(P f)(0)` from the kernel weights.
fn average_at_origin(kernel: &Kernel, torus: Torus, values: &[f64]) -> f64 {
    kernel
        .support()
        .map(|(o, w)| w * values[torus.index(o)])
        .sum()
}

fn run_trial(
    setup: &PropertySetup,
    trial: u64,
    rule: SiteRule,
) -> Result<(Vec<Violation>, f64), DynamicsError> {
    let torus = setup.torus;
    let kernel = &setup.kernel;
    let len = torus.len();
    let mut rng = ChaCha8Rng::from_seed(derive_key("property", setup.seed, trial));
    let wall = sample_wall(&setup.wall, setup.seed, trial, torus);
    let noise = NoiseStream::with_replicate(setup.noise, setup.seed, trial);

    // W <= W': raise about a tenth of the sites.
    let mut raised = wall.field().clone();
    for v in raised.values_mut() {
        if rng.random_bool(0.1) {
            let lift = -rng.random::<f64>().ln();
            *v = if v.is_finite() { *v + lift } else { lift };
        }
    }
    let raised = WallField::new(raised);
    let level = 2.0 * rng.random::<f64>();
    let hat = wall.hat();
    let hat0 = hat.raised_at(0, 0.0);
    let free = WallField::free(torus);

    let with = |w: &WallField, init: Init| Process::with_rule(kernel, w, init, rule);
    let mut x = with(&wall, Init::ZeroJoinWall)?;
    let mut x_raised = with(&raised, Init::ZeroJoinWall)?;
    let mut x_high = with(&wall, Init::Level(level))?;
    let mut x_hat0 = with(&hat0, Init::ZeroJoinWall)?;
    let mut x_hat = with(&hat, Init::ZeroJoinWall)?;
    let mut y = with(&free, Init::ZeroJoinWall)?;
    let stencil = Stencil::new(kernel, torus)?;

    let mut rec = Recorder {
        trial,
        seed: setup.seed,
        found: Vec::new(),
    };
    // Only the sites that can still influence the origin at the last step
    // are advanced: at step n the box |j|_inf <= v (steps - n). The rest of
    // each state keeps stale values that are never read again.
    let v = kernel.range() as usize;
    let side = torus.side();
    let mut eps = vec![0.0; side];
    let mut drift = vec![0.0; side];
    let mut drift_hat0 = vec![0.0; side];
    let mut drift_hat = vec![0.0; side];
    let mut bound = vec![0.0; len];
    let mut p_bound = vec![0.0; len];
    let mut w2_w3 = 0.0f64;

    for n in 1..=setup.steps {
        if n == setup.steps {
            let mut full = vec![0.0; len];
            noise.fill(n, &mut full);
            let prev = x.field();
            let a = step_w2(&prev, &wall, kernel, &full)?;
            let b = step_w3(&prev, &wall, kernel, &full)?;
            for (site, (u, v)) in a.values().iter().zip(b.values()).enumerate() {
                let d = (u - v).abs();
                w2_w3 = w2_w3.max(d);
                if d > 1e-12 && !rec.found.iter().any(|f| f.property == W2_W3) {
                    rec.found.push(Violation {
                        property: W2_W3,
                        trial,
                        seed: setup.seed,
                        site,
                        step: n,
                        excess: d,
                    });
                }
            }
        }

        // The bounds use P at time n - 1. P(X^{W^0} - X^{W^}) is the
        // difference of the two drifts, in which the noise cancels.
        let py0 = average_at_origin(kernel, torus, y.state());
        let kick = (-noise.value(n, 0)).max(0.0) + (-py0).max(0.0);
        let radius = v * (setup.steps - n) as usize;

        for (row, cols) in torus.box_segments(radius) {
            let first = row * side + cols.start;
            let m = cols.len();
            let eps = &mut eps[..m];
            noise.fill_from(n, first, eps);
            x.step_segment(row, cols.clone(), Some(eps), Some(&mut drift[..m]));
            x_raised.step_segment(row, cols.clone(), Some(eps), None);
            x_high.step_segment(row, cols.clone(), Some(eps), None);
            x_hat0.step_segment(row, cols.clone(), Some(eps), Some(&mut drift_hat0[..m]));
            x_hat.step_segment(row, cols.clone(), Some(eps), Some(&mut drift_hat[..m]));
            y.step_segment(row, cols.clone(), Some(eps), None);
            let bound_next = &mut p_bound[first..first + m];
            stencil.apply_segment(&bound, row, cols, bound_next);
            if first == 0 {
                bound_next[0] += kick;
            }

            let (xs, xr, xh) = (x.pending(), x_raised.pending(), x_high.pending());
            let (h0, h, ys) = (x_hat0.pending(), x_hat.pending(), y.pending());
            let w = wall.values();
            for (k, i) in (first..first + m).enumerate() {
                let d = h0[i] - h[i];
                let pd = drift_hat0[k] - drift_hat[k] + if i == 0 { kick } else { 0.0 };
                let ok = (w[i] <= xs[i])
                    & (drift[k] <= xs[i])
                    & (xs[i] <= xr[i])
                    & (xs[i] <= xh[i])
                    & (h[i] <= h0[i])
                    & (ys[i] <= h[i])
                    & (d <= pd)
                    & (d <= bound_next[k]);
                if ok {
                    continue;
                }
                let pairs = [
                    (WALL_DOMINATION, w[i], xs[i]),
                    (WALL_DOMINATION, drift[k], xs[i]),
                    (WALL_ORDER, xs[i], xr[i]),
                    (INITIAL_ORDER, xs[i], xh[i]),
                    (HAT_CHAIN, h[i], h0[i]),
                    (HAT_CHAIN, ys[i], h[i]),
                    (WI_STEP, d, pd),
                    (WI_ITERATED, d, bound_next[k]),
                ];
                for (property, a, b) in pairs {
                    rec.check(property, n, i, a, b);
                }
            }
        }
        for p in [&mut x, &mut x_raised, &mut x_high, &mut x_hat0, &mut x_hat, &mut y] {
            p.commit();
        }
        std::mem::swap(&mut bound, &mut p_bound);
    }

    let tilde = wall.tilde();
    let site = rng.random_range(0..len);
    let report = nu_sandwich_check(kernel, &tilde, site, setup.steps)?;
    if let Some((step, j)) = report.worst {
        rec.found.push(Violation {
            property: NU_SANDWICH,
            trial,
            seed: setup.seed,
            site: j,
            step,
            excess: report.lower_violation.max(report.upper_violation),
        });
    }

    let order = |p: &str| SUITES.iter().position(|s| *s == p).unwrap_or(SUITES.len());
    rec.found.sort_by_key(|v| order(v.property));
    Ok((rec.found, w2_w3))
}

/// Runs every suite on `trials` instances with the standard engine.
pub fn property_check(setup: &PropertySetup, trials: u64) -> Result<PropertyReport, DynamicsError> {
    property_check_with_rule(setup, trials, exclusion)
}

/// Runs every suite with a replacement site update rule.
pub fn property_check_with_rule(
    setup: &PropertySetup,
    trials: u64,
    rule: SiteRule,
) -> Result<PropertyReport, DynamicsError> {
    let results = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(setup, t, rule))
        .collect::<Result<Vec<_>, _>>()?;
    let mut violations = Vec::new();
    let mut max_diff = 0.0f64;
    for (v, d) in results {
        violations.extend(v);
        max_diff = max_diff.max(d);
    }
    Ok(PropertyReport {
        trials,
        instances: SUITES.iter().map(|s| (*s, trials)).collect(),
        violations,
        max_w2_w3_diff: max_diff,
    })
}

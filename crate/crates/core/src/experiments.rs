//! Monte Carlo growth curves, exponent fits, the `mu` recursion check and
//! the upper-bound coupling experiment.

use std::io::{self, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{cone_segments, le_tol, step_segments, DynamicsError, Init, Mode, Process};
use crate::lattice::{Kernel, Torus};
use crate::noise::{derive_key, NoiseStream, SymmetricLaw};
use crate::wall::{sample_wall, WallError, WallField, WallSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Wall(#[from] WallError),
    #[error("time grid must be nonempty and strictly increasing")]
    BadGrid,
    #[error("need at least 2 replicates, got {0}")]
    TooFewReplicates(u64),
    #[error("the site-average estimator needs annealed averaging")]
    EstimatorNeedsAnnealing,
    #[error("insufficient growth: {0}")]
    InsufficientGrowth(String),
    #[error("upper bounds need noise tail exponent alpha > 1, got {0}")]
    AlphaOutOfRange(f64),
}

/// `1, 2, 4, ..` up to the largest power of two not above `max_n`.
pub fn geometric_grid(max_n: u64) -> Vec<u64> {
    std::iter::successors(Some(1u64), |&n| n.checked_mul(2))
        .take_while(|&n| n <= max_n.max(1))
        .collect()
}

/// Which wall a variant sees, derived from the replicate's sampled wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WallChoice {
    Sampled,
    /// `0` where `W >= 0`, `-inf` elsewhere.
    Hat,
    /// The hat wall with the origin added.
    HatWithOrigin,
    /// `W` where `W >= 0`, `-inf` elsewhere.
    Tilde,
    /// No wall.
    Free,
}

impl WallChoice {
    pub fn apply(&self, wall: &WallField) -> WallField {
        match self {
            WallChoice::Sampled => wall.clone(),
            WallChoice::Hat => wall.hat(),
            WallChoice::HatWithOrigin => wall.hat().raised_at(0, 0.0),
            WallChoice::Tilde => wall.tilde(),
            WallChoice::Free => WallField::free(wall.torus()),
        }
    }
}

/// One process of a coupled family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variant {
    pub wall: WallChoice,
    pub init: Init,
}

impl Variant {
    pub fn new(wall: WallChoice, init: Init) -> Self {
        Variant { wall, init }
    }
}

/// Expectation over wall and noise, or over noise with one frozen wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    #[default]
    Annealed,
    Quenched { wall_replicate: u64 },
}

/// How one replicate is turned into a sample of `X_n(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    /// The origin height.
    #[default]
    Origin,
    /// The mean height over all sites. Under annealed averaging on the
    /// torus every site has the law of the origin, so this has the same
    /// expectation with a smaller variance.
    SiteAverage,
}

/// Everything that defines a Monte Carlo growth experiment.
#[derive(Debug, Clone)]
pub struct GrowthSpec {
    pub kernel: Kernel,
    pub torus: Torus,
    pub noise: SymmetricLaw,
    pub wall: WallSpec,
    /// Seed of the noise streams.
    pub seed: u64,
    /// Seed of the wall fields.
    pub wall_seed: u64,
    pub times: Vec<u64>,
    pub replicates: u64,
    pub averaging: Averaging,
    pub estimator: Estimator,
    pub mode: Mode,
}

impl GrowthSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.times.is_empty() || self.times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExperimentError::BadGrid);
        }
        if self.replicates < 2 {
            return Err(ExperimentError::TooFewReplicates(self.replicates));
        }
        if self.estimator == Estimator::SiteAverage && self.averaging != Averaging::Annealed {
            return Err(ExperimentError::EstimatorNeedsAnnealing);
        }
        self.wall.validate()?;
        self.mode
            .check(self.torus.side(), self.kernel.range(), self.max_time())?;
        Ok(())
    }

    pub fn max_time(&self) -> u64 {
        self.times.last().copied().unwrap_or(0)
    }

    pub fn noise_stream(&self, replicate: u64) -> NoiseStream {
        NoiseStream::with_replicate(self.noise, self.seed, replicate)
    }

    pub fn wall_field(&self, replicate: u64) -> WallField {
        let r = match self.averaging {
            Averaging::Annealed => replicate,
            Averaging::Quenched { wall_replicate } => wall_replicate,
        };
        sample_wall(&self.wall, self.wall_seed, r, self.torus)
    }

    /// Stable description of every input that affects the samples.
    pub fn fingerprint(&self) -> String {
        format!(
            "kernel[{}];L={};noise={};wall={};seed={};wall_seed={};times={:?};reps={};avg={:?};est={:?}",
            self.kernel.fingerprint(),
            self.torus.side(),
            self.noise.name(),
            self.wall.describe(),
            self.seed,
            self.wall_seed,
            self.times,
            self.replicates,
            self.averaging,
            self.estimator
        )
    }
}

/// `E X_n(0)` over a time grid, with the per-replicate samples kept for
/// resampling.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthCurve {
    pub times: Vec<u64>,
    pub means: Vec<f64>,
    pub ses: Vec<f64>,
    pub replicates: u64,
    pub fingerprint: String,
    /// `samples[t][r]`: the estimator for replicate `r` at `times[t]`.
    pub samples: Vec<Vec<f64>>,
    /// `second_moments[t][r]`: the matching estimate of `E X_n(0)^2`.
    pub second_moments: Vec<Vec<f64>>,
}

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl GrowthCurve {
    pub fn from_samples(
        times: Vec<u64>,
        samples: Vec<Vec<f64>>,
        second_moments: Vec<Vec<f64>>,
        fingerprint: String,
    ) -> Self {
        let (means, ses) = samples.iter().map(|s| mean_se(s)).unzip();
        GrowthCurve {
            replicates: samples.first().map_or(0, |s| s.len() as u64),
            times,
            means,
            ses,
            fingerprint,
            samples,
            second_moments,
        }
    }

    /// Curve without samples, e.g. read back from CSV.
    pub fn from_summary(times: Vec<u64>, means: Vec<f64>, ses: Vec<f64>, replicates: u64) -> Self {
        GrowthCurve {
            times,
            means,
            ses,
            replicates,
            fingerprint: String::new(),
            samples: Vec::new(),
            second_moments: Vec::new(),
        }
    }

    /// `Var X_n(0)` estimated as `E X^2 - (E X)^2`.
    pub fn variance(&self, t: usize) -> f64 {
        let (m2, _) = mean_se(&self.second_moments[t]);
        m2 - self.means[t] * self.means[t]
    }

    /// The same curve rebuilt from the replicates listed in `picks`.
    pub fn resampled(&self, picks: &[usize]) -> GrowthCurve {
        let pick = |rows: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            rows.iter()
                .map(|s| picks.iter().map(|&i| s[i]).collect())
                .collect()
        };
        GrowthCurve::from_samples(
            self.times.clone(),
            pick(&self.samples),
            pick(&self.second_moments),
            self.fingerprint.clone(),
        )
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "mean", "se", "replicates"])?;
        for ((n, m), s) in self.times.iter().zip(&self.means).zip(&self.ses) {
            w.write_record([
                n.to_string(),
                m.to_string(),
                s.to_string(),
                self.replicates.to_string(),
            ])?;
        }
        w.flush()
    }

    /// Reads `n, mean, se[, replicates]` columns by header name.
    pub fn read_csv<R: Read>(input: R) -> Result<GrowthCurve, String> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers().map_err(|e| e.to_string())?.clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let (Some(cn), Some(cm), Some(cs)) = (col("n"), col("mean"), col("se")) else {
            return Err("CSV needs columns n, mean, se".into());
        };
        let cr = col("replicates");
        let (mut times, mut means, mut ses, mut reps) = (vec![], vec![], vec![], 0u64);
        for rec in r.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            let field = |i: usize| rec.get(i).unwrap_or("").trim().to_string();
            times.push(field(cn).parse().map_err(|_| format!("bad n: {}", field(cn)))?);
            means.push(field(cm).parse().map_err(|_| format!("bad mean: {}", field(cm)))?);
            ses.push(field(cs).parse().map_err(|_| format!("bad se: {}", field(cs)))?);
            if let Some(c) = cr {
                reps = field(c).parse().unwrap_or(0);
            }
        }
        Ok(GrowthCurve::from_summary(times, means, ses, reps))
    }
}

/// Per-replicate `(first, second)` moment samples for each variant at
/// each grid time, all variants driven by one noise realization.
fn replicate_samples(
    spec: &GrowthSpec,
    variants: &[Variant],
    replicate: u64,
) -> Result<Vec<Vec<(f64, f64)>>, ExperimentError> {
    let wall = spec.wall_field(replicate);
    let noise = spec.noise_stream(replicate);
    let mut procs = variants
        .iter()
        .map(|v| Process::new(&spec.kernel, &v.wall.apply(&wall), v.init))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = vec![Vec::with_capacity(spec.times.len()); variants.len()];
    let mut buf = Vec::new();
    let last = spec.max_time();
    let whole = spec.torus.box_segments(spec.torus.side());
    let record = |p: &Process| -> (f64, f64) {
        match spec.estimator {
            Estimator::Origin => (p.origin(), p.origin() * p.origin()),
            Estimator::SiteAverage => {
                let s = p.state();
                let n = s.len() as f64;
                (
                    s.iter().sum::<f64>() / n,
                    s.iter().map(|x| x * x).sum::<f64>() / n,
                )
            }
        }
    };
    let mut next = 0;
    for n in 0..=last {
        if n > 0 {
            // The origin estimator only needs the backward cone of (0, last).
            let cone;
            let segments = match spec.estimator {
                Estimator::Origin => {
                    cone = cone_segments(spec.torus, spec.kernel.range(), last, n);
                    &cone
                }
                Estimator::SiteAverage => &whole,
            };
            step_segments(&mut procs, &noise, n, segments, &mut buf);
        }
        if spec.times[next] == n {
            for (o, p) in out.iter_mut().zip(&procs) {
                o.push(record(p));
            }
            next += 1;
        }
    }
    Ok(out)
}

/// Coupled growth curves, one per variant, sharing walls and noise.
pub fn estimate_coupled(
    spec: &GrowthSpec,
    variants: &[Variant],
) -> Result<Vec<GrowthCurve>, ExperimentError> {
    spec.validate()?;
    let per_rep = (0..spec.replicates)
        .into_par_iter()
        .map(|r| replicate_samples(spec, variants, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((0..variants.len())
        .map(|v| {
            let (samples, second): (Vec<Vec<f64>>, Vec<Vec<f64>>) = (0..spec.times.len())
                .map(|t| per_rep.iter().map(|rep| rep[v][t]).unzip())
                .unzip();
            let fp = format!("{};variant={:?}", spec.fingerprint(), variants[v]);
            GrowthCurve::from_samples(spec.times.clone(), samples, second, fp)
        })
        .collect())
}

/// `E X_n(0)` for the sampled wall started from `0 v W`.
pub fn estimate_growth(spec: &GrowthSpec) -> Result<GrowthCurve, ExperimentError> {
    let v = Variant::new(WallChoice::Sampled, Init::ZeroJoinWall);
    Ok(estimate_coupled(spec, &[v])?.remove(0))
}

/// `E X_n(0) ~ c (log n)^{gamma_inv}`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExponentFit {
    pub gamma_inv: f64,
    pub c: f64,
    pub r2: f64,
    /// Smallest and largest `n` used.
    pub window: (u64, u64),
    pub points: usize,
    /// Bootstrap percentile interval for `gamma_inv`.
    pub ci: Option<(f64, f64)>,
}

/// Grid points below this are left out of fits.
pub const FIT_MIN_N: u64 = 16;

/// Weighted least squares of `ln mean` on `ln ln n` over `n >= 16`, with
/// weights `(mean / se)^2` (unit weights when any `se` is 0).
pub fn fit_exponent(curve: &GrowthCurve) -> Result<ExponentFit, ExperimentError> {
    let pts: Vec<usize> = (0..curve.times.len())
        .filter(|&i| curve.times[i] >= FIT_MIN_N)
        .collect();
    if pts.len() < 5 {
        return Err(ExperimentError::InsufficientGrowth(format!(
            "{} grid points with n >= {FIT_MIN_N}, need 5",
            pts.len()
        )));
    }
    if let Some(&i) = pts.iter().find(|&&i| !(curve.means[i] > 0.0)) {
        return Err(ExperimentError::InsufficientGrowth(format!(
            "mean {} at n = {} is not positive",
            curve.means[i], curve.times[i]
        )));
    }
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    let rise = curve.means[last] - curve.means[first];
    let noise = 2.0 * (curve.ses[last].powi(2) + curve.ses[first].powi(2)).sqrt();
    if rise <= noise {
        return Err(ExperimentError::InsufficientGrowth(format!(
            "mean rises by {rise} between n = {} and n = {}, within noise {noise}",
            curve.times[first], curve.times[last]
        )));
    }
    let unit = pts.iter().any(|&i| curve.ses[i] <= 0.0);
    let data: Vec<(f64, f64, f64)> = pts
        .iter()
        .map(|&i| {
            let x = (curve.times[i] as f64).ln().ln();
            let y = curve.means[i].ln();
            let w = if unit {
                1.0
            } else {
                (curve.means[i] / curve.ses[i]).powi(2)
            };
            (x, y, w)
        })
        .collect();
    let sw: f64 = data.iter().map(|d| d.2).sum();
    let mx = data.iter().map(|d| d.2 * d.0).sum::<f64>() / sw;
    let my = data.iter().map(|d| d.2 * d.1).sum::<f64>() / sw;
    let sxx: f64 = data.iter().map(|d| d.2 * (d.0 - mx).powi(2)).sum();
    let sxy: f64 = data.iter().map(|d| d.2 * (d.0 - mx) * (d.1 - my)).sum();
    let syy: f64 = data.iter().map(|d| d.2 * (d.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok(ExponentFit {
        gamma_inv: slope,
        c: intercept.exp(),
        r2,
        window: (curve.times[first], curve.times[last]),
        points: pts.len(),
        ci: None,
    })
}

/// Refits on `resamples` bootstrap draws of the replicates and attaches a
/// 95% percentile interval. Draws whose fit fails are skipped.
pub fn bootstrap_fit(
    curve: &GrowthCurve,
    resamples: usize,
    seed: u64,
) -> Result<ExponentFit, ExperimentError> {
    let mut fit = fit_exponent(curve)?;
    let n = curve.replicates as usize;
    if curve.samples.is_empty() || n < 2 || resamples == 0 {
        return Ok(fit);
    }
    let mut rng = ChaCha8Rng::from_seed(derive_key("bootstrap", seed, 0));
    let mut slopes: Vec<f64> = (0..resamples)
        .filter_map(|_| {
            let picks: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            fit_exponent(&curve.resampled(&picks)).ok().map(|f| f.gamma_inv)
        })
        .collect();
    if slopes.len() >= 2 {
        slopes.sort_by(f64::total_cmp);
        let q = |p: f64| slopes[((p * (slopes.len() - 1) as f64).round()) as usize];
        fit.ci = Some((q(0.025), q(0.975)));
    }
    Ok(fit)
}

/// Default number of bootstrap draws.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// One tested `(n, C_0)` pair of the `mu` recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct MuCheck {
    pub n: u64,
    pub c0: f64,
    /// `mu_n - mu_{n-1}`.
    pub increment: f64,
    /// Standard error of the increment (paired over replicates).
    pub se: f64,
    /// `G(mu_{n-1} + C_0) q`.
    pub required: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuReport {
    pub q: f64,
    pub checks: Vec<MuCheck>,
    /// `C_0` values for which every tested `n` holds.
    pub holding: Vec<f64>,
    /// The smallest of those: the tightest constant the data support.
    pub tightest: Option<f64>,
}

/// Tests `mu_n >= mu_{n-1} + G(mu_{n-1} + C_0) q - 3 SE` for the hat wall,
/// where `mu_n = E X^{W^}_n(0)` and `G(x) = E (eps - x)^+`.
pub fn mu_recursion_check(
    spec: &GrowthSpec,
    ns: &[u64],
    c0s: &[f64],
) -> Result<MuReport, ExperimentError> {
    let mut times: Vec<u64> = ns.iter().flat_map(|&n| [n.max(1) - 1, n.max(1)]).collect();
    times.sort_unstable();
    times.dedup();
    let spec = GrowthSpec {
        times,
        ..spec.clone()
    };
    let v = Variant::new(WallChoice::Hat, Init::ZeroJoinWall);
    let curve = estimate_coupled(&spec, &[v])?.remove(0);
    let q = spec.wall.prob_nonnegative();
    let at = |n: u64| spec.times.iter().position(|&t| t == n).expect("grid has n");
    let mut checks = Vec::new();
    for &c0 in c0s {
        for &n in ns.iter().filter(|&&n| n >= 1) {
            let (i, j) = (at(n - 1), at(n));
            let diffs: Vec<f64> = curve.samples[j]
                .iter()
                .zip(&curve.samples[i])
                .map(|(a, b)| a - b)
                .collect();
            let (increment, se) = mean_se(&diffs);
            let required = spec.noise.expected_excess(curve.means[i] + c0) * q;
            checks.push(MuCheck {
                n,
                c0,
                increment,
                se,
                required,
                holds: increment >= required - 3.0 * se,
            });
        }
    }
    let holding: Vec<f64> = c0s
        .iter()
        .copied()
        .filter(|&c0| checks.iter().filter(|c| c.c0 == c0).all(|c| c.holds))
        .collect();
    let tightest = holding.iter().copied().reduce(f64::min);
    Ok(MuReport {
        q,
        checks,
        holding,
        tightest,
    })
}

/// `a_n` of the upper bound. `theta_inv = 0` for walls without a tail.
pub fn upper_bound_level(k: f64, n: u64, alpha: f64, theta_inv: f64, dim: usize) -> (f64, bool) {
    let d = dim as f64;
    let l = (n as f64).ln();
    let critical = (alpha - (1.0 + d / 2.0)).abs() < 1e-12;
    let noise_part = if critical {
        l.powf(2.0 / (2.0 + d)) * l.ln().powf(d / (d + 2.0))
    } else {
        l.powf((1.0 / alpha).max(2.0 / (2.0 + d)))
    };
    (2.0 * k * (noise_part + l.powf(theta_inv)), critical)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperBoundReport {
    pub n: u64,
    pub k: f64,
    pub a_n: f64,
    pub r_n: f64,
    /// Whether the `alpha = 1 + d/2` form of `a_n` was used.
    pub critical_form: bool,
    /// `P(X^W_n(0) >= a_n)`.
    pub p_exceed: f64,
    /// `P(X^{W,r_n}_n(0) != Y^{r_n}_n(0))`.
    pub p_decouple: f64,
    /// `P(R_n > K (log n)^{1/theta})`.
    pub p_rn: f64,
    /// Replicates where `X^W_m(0) <= X^{W,r_n}_m(0)` failed at some `m`.
    pub dominance_violations: u64,
    /// Whether `R_n` was taken over the whole torus because the ball
    /// `|i| <= vn` wraps.
    pub rn_over_torus: bool,
    pub replicates: u64,
}

impl UpperBoundReport {
    pub fn csv_header() -> [&'static str; 6] {
        ["n", "K", "p_exceed", "p_decouple", "p_Rn", "dominance_violations"]
    }

    pub fn csv_row(&self) -> [String; 6] {
        [
            self.n.to_string(),
            self.k.to_string(),
            self.p_exceed.to_string(),
            self.p_decouple.to_string(),
            self.p_rn.to_string(),
            self.dominance_violations.to_string(),
        ]
    }
}

/// Runs `X^W` from `0 v W`, `X^{W,r_n}` from `r_n v W` and the free
/// `Y^{r_n}` from `r_n` on shared noise, with `r_n = a_n / 2`.
pub fn upper_bound_experiment(
    spec: &GrowthSpec,
    k: f64,
    n: u64,
) -> Result<UpperBoundReport, ExperimentError> {
    let alpha = spec.noise.tail_exponent();
    if !(alpha > 1.0) {
        return Err(ExperimentError::AlphaOutOfRange(alpha));
    }
    let spec = GrowthSpec {
        times: vec![n],
        estimator: Estimator::Origin,
        ..spec.clone()
    };
    spec.validate()?;
    let theta_inv = spec.wall.tail_exponent().map_or(0.0, |t| 1.0 / t);
    let (a_n, critical_form) = upper_bound_level(k, n, alpha, theta_inv, spec.torus.dim());
    let r_n = a_n / 2.0;
    let rn_level = k * (n as f64).ln().powf(theta_inv);
    let radius = n * spec.kernel.range() as u64;
    let rn_over_torus = !spec.torus.holds_ball(radius);
    let per_rep = (0..spec.replicates)
        .into_par_iter()
        .map(|r| -> Result<(bool, bool, bool, bool), ExperimentError> {
            let wall = spec.wall_field(r);
            let noise = spec.noise_stream(r);
            let free = WallField::free(spec.torus);
            let mut procs = vec![
                Process::new(&spec.kernel, &wall, Init::ZeroJoinWall)?,
                Process::new(&spec.kernel, &wall, Init::Level(r_n))?,
                Process::new(&spec.kernel, &free, Init::FreeLevel(r_n))?,
            ];
            let mut buf = Vec::new();
            let mut dominated = procs[0].origin() <= procs[1].origin();
            for m in 1..=n {
                let cone = cone_segments(spec.torus, spec.kernel.range(), n, m);
                step_segments(&mut procs, &noise, m, &cone, &mut buf);
                let (x, xr) = (procs[0].state(), procs[1].state());
                let side = spec.torus.side();
                dominated &= cone.iter().all(|(row, cols)| {
                    let sites = row * side + cols.start..row * side + cols.end;
                    x[sites.clone()]
                        .iter()
                        .zip(&xr[sites])
                        .all(|(a, b)| le_tol(*a, *b))
                });
            }
            let (x, xr, yr) = (&procs[0], &procs[1], &procs[2]);
            let rn = if rn_over_torus {
                wall.max()
            } else {
                wall.running_max(n, spec.kernel.range())?
            };
            Ok((
                x.origin() >= a_n,
                xr.origin() != yr.origin(),
                rn > rn_level,
                !dominated,
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let reps = spec.replicates as f64;
    let frac = |f: fn(&(bool, bool, bool, bool)) -> bool| {
        per_rep.iter().filter(|r| f(r)).count() as f64 / reps
    };
    Ok(UpperBoundReport {
        n,
        k,
        a_n,
        r_n,
        critical_form,
        p_exceed: frac(|r| r.0),
        p_decouple: frac(|r| r.1),
        p_rn: frac(|r| r.2),
        dominance_violations: per_rep.iter().filter(|r| r.3).count() as u64,
        rn_over_torus,
        replicates: spec.replicates,
    })
}

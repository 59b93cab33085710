//! First-return probabilities of the kernel's random walk and the
//! closed-form `nu` for a single spike.

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{DynamicsError, NuProcess};
use crate::lattice::{Field, Kernel, KernelError, Stencil, Torus};
use crate::noise::derive_key;
use crate::wall::WallField;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("spike height must be positive, got {0}")]
    NonpositiveSpike(f64),
    #[error("site {site:?} lies outside the stored window of radius {radius}")]
    OutsideWindow { site: Vec<i64>, radius: u64 },
    #[error("step {k} is beyond the horizon {horizon}")]
    BeyondHorizon { k: u64, horizon: u64 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Exact first-passage recursion on the box `|j|_inf <= vN`:
/// `f_1 = p(., 0)`, `f_k = P(f_{k-1} with the value at 0 set to 0)`.
///
/// Wrapped copies of the origin are more than `vN` away from every box
/// site, so for `k <= N` the values equal the ones on `Z^d`. The value at
/// the origin is the first-return probability `p_k^{0}(0,0)`.
#[derive(Debug, Clone)]
pub struct FirstPassage {
    stencil: Stencil,
    current: Vec<f64>,
    next: Vec<f64>,
    k: u64,
    horizon: u64,
}

impl FirstPassage {
    pub fn new(kernel: &Kernel, horizon: u64) -> Result<Self, WalkError> {
        if horizon == 0 {
            return Err(WalkError::ZeroHorizon);
        }
        let side = 2 * kernel.range() as usize * horizon as usize + 1;
        let torus = Torus::new(kernel.dim(), side);
        let stencil = Stencil::new(kernel, torus)?;
        let mut current = vec![0.0; torus.len()];
        current[0] = 1.0;
        Ok(FirstPassage {
            stencil,
            next: vec![0.0; current.len()],
            current,
            k: 0,
            horizon,
        })
    }

    /// The box, indexed so that site `j` sits at `torus.index(j)`.
    pub fn torus(&self) -> Torus {
        self.stencil.torus()
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// `f_k` over the box (after `k` calls to [`advance`](Self::advance)).
    pub fn values(&self) -> &[f64] {
        &self.current
    }

    /// Computes `f_{k+1}`. Returns `false` once the horizon is reached.
    pub fn advance(&mut self) -> bool {
        if self.k == self.horizon {
            return false;
        }
        // Starting from delta_0 the first step leaves the origin unkilled.
        if self.k > 0 {
            self.current[0] = 0.0;
        }
        self.stencil
            .apply(&self.current, &mut self.next);
        std::mem::swap(&mut self.current, &mut self.next);
        self.k += 1;
        true
    }
}

/// First-return probabilities `f_k(j)` for `k <= N` on a window
/// `|j|_inf <= radius` around the origin, plus the full origin series and
/// the surviving mass.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstReturnTable {
    horizon: u64,
    radius: u64,
    window: Torus,
    /// `values[k - 1]` holds `f_k` on the window.
    values: Vec<Vec<f64>>,
    /// `survival[k - 1] = sum_{j != 0} f_k(j)`, the mass of the walk from 0
    /// that has not yet come back by step `k`.
    survival: Vec<f64>,
}

/// Table over the whole exact box `|j| <= vN`.
pub fn first_return_probs(kernel: &Kernel, horizon: u64) -> Result<FirstReturnTable, WalkError> {
    FirstReturnTable::new(kernel, horizon, kernel.range() as u64 * horizon)
}

impl FirstReturnTable {
    pub fn new(kernel: &Kernel, horizon: u64, radius: u64) -> Result<Self, WalkError> {
        let mut walk = FirstPassage::new(kernel, horizon)?;
        let radius = radius.min(kernel.range() as u64 * horizon);
        let boxt = walk.torus();
        let window = Torus::new(kernel.dim(), 2 * radius as usize + 1);
        let map: Vec<usize> = (0..window.len())
            .map(|w| boxt.index(&window.centered(w)))
            .collect();
        let mut values = Vec::with_capacity(horizon as usize);
        let mut survival = Vec::with_capacity(horizon as usize);
        while walk.advance() {
            let f = walk.values();
            values.push(map.iter().map(|&b| f[b]).collect());
            survival.push(f[1..].iter().sum());
        }
        Ok(FirstReturnTable {
            horizon,
            radius,
            window,
            values,
            survival,
        })
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn radius(&self) -> u64 {
        self.radius
    }

    fn slot(&self, site: &[i64]) -> Result<usize, WalkError> {
        if site.iter().any(|c| c.unsigned_abs() > self.radius) {
            return Err(WalkError::OutsideWindow {
                site: site.to_vec(),
                radius: self.radius,
            });
        }
        Ok(self.window.index(site))
    }

    /// `f_k(j)`; for `j = 0` this is `p_k^{0}(0,0)`.
    pub fn get(&self, k: u64, site: &[i64]) -> Result<f64, WalkError> {
        if k == 0 || k > self.horizon {
            return Err(WalkError::BeyondHorizon {
                k,
                horizon: self.horizon,
            });
        }
        Ok(self.values[k as usize - 1][self.slot(site)?])
    }

    /// `sum_{k <= n} f_k(j)` for `n <= N`.
    pub fn partial_sum(&self, n: u64, site: &[i64]) -> Result<f64, WalkError> {
        if n > self.horizon {
            return Err(WalkError::BeyondHorizon {
                k: n,
                horizon: self.horizon,
            });
        }
        let s = self.slot(site)?;
        Ok(self.values[..n as usize].iter().map(|f| f[s]).sum())
    }

    /// `sum_{k <= n} f_k` over the whole window, as a field on a torus of
    /// side `2 * radius + 1` (site `j` at `torus.index(j)`).
    pub fn partial_sum_field(&self, n: u64) -> Field {
        let mut acc = vec![0.0; self.window.len()];
        for f in &self.values[..n.min(self.horizon) as usize] {
            for (a, v) in acc.iter_mut().zip(f) {
                *a += v;
            }
        }
        Field::from_vec(self.window, acc).expect("window sized")
    }

    /// `p_k^{0}(0,0)` for `k = 1..=N`.
    pub fn origin_returns(&self) -> Vec<f64> {
        let o = self.window.index(&vec![0; self.window.dim()]);
        self.values.iter().map(|f| f[o]).collect()
    }

    pub fn survival(&self) -> &[f64] {
        &self.survival
    }
}

/// Return probabilities `p_k(0)` for `k = 0..=n`, from the characteristic
/// function `phi` on an `M^d` frequency grid.
///
/// The grid average of `phi^k` is the return probability on a torus of
/// side `M`, which equals the `Z^d` value whenever `M > vk`. A smaller `M`
/// is used when the walk's spread makes the wrapped terms negligible
/// (`M^2 >= 80 N sigma^2`, so the wrap terms are below `exp(-40)`).
pub fn origin_return_probs(kernel: &Kernel, n: u64) -> Vec<f64> {
    let d = kernel.dim();
    let exact = kernel.range() as u64 * n + 1;
    let spread = (80.0 * n as f64 * kernel.max_axis_variance()).sqrt().ceil() as u64;
    let m = exact.min(spread.max(kernel.min_side() as u64)) as usize;
    let cos: Vec<f64> = (0..m).map(|t| (2.0 * PI * t as f64 / m as f64).cos()).collect();
    let pairs: Vec<(Vec<usize>, f64)> = kernel
        .pairs()
        .iter()
        .map(|(o, w)| {
            let o = o.iter().map(|&c| c.rem_euclid(m as i64) as usize).collect();
            (o, 2.0 * w)
        })
        .collect();
    let stay = kernel.stay_weight();
    let grid = Torus::new(d, m);
    // Terms below this contribute less than 1e-18 to any p_k.
    let cutoff = 1e-18;
    let mut acc = vec![0.0; n as usize + 1];
    let mut coords = vec![0usize; d];
    for point in 0..grid.len() {
        let mut rest = point;
        for c in coords.iter_mut().rev() {
            *c = rest % m;
            rest /= m;
        }
        let phi = stay
            + pairs
                .iter()
                .map(|(o, w)| {
                    let phase = o.iter().zip(&coords).map(|(a, b)| a * b).sum::<usize>() % m;
                    w * cos[phase]
                })
                .sum::<f64>();
        let mut power = 1.0;
        for a in acc.iter_mut() {
            *a += power;
            power *= phi;
            if power.abs() < cutoff {
                break;
            }
        }
    }
    let scale = 1.0 / grid.len() as f64;
    acc.iter_mut().for_each(|a| *a *= scale);
    acc
}

/// First-return probabilities from return probabilities by the renewal
/// equation `p_k = sum_{m=1}^{k} f_m p_{k-m}` (with `p_0 = 1`).
pub fn renewal_first_returns(returns: &[f64]) -> Vec<f64> {
    let n = returns.len().saturating_sub(1);
    let mut f = vec![0.0; n + 1];
    for k in 1..=n {
        let conv: f64 = (1..k).map(|m| f[m] * returns[k - m]).sum();
        f[k] = returns[k] - conv;
    }
    f
}

/// `a_N = sum_{k <= N} p_k^{0}(0,0)` with a heuristic tail.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSum {
    pub horizon: u64,
    pub a_n: f64,
    /// Estimated `a - a_N`. For `d <= 2` this is `1 - a_N`.
    pub tail: f64,
    /// Always true: the tail extrapolates a fit and is not a proof.
    pub heuristic: bool,
    /// `p_k^{0}(0,0)` for `k = 1..=N`.
    pub first_returns: Vec<f64>,
}

impl ReturnSum {
    pub fn upper(&self) -> f64 {
        self.a_n + self.tail
    }

    pub fn bracket(&self) -> (f64, f64) {
        (self.a_n, self.upper())
    }

    pub fn width(&self) -> f64 {
        self.tail
    }

    /// Rows `(k, p_k^{0}(0,0), a_k)`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "first_return", "a_k"])?;
        let mut a = 0.0;
        for (k, f) in self.first_returns.iter().enumerate() {
            a += f;
            w.write_record([(k + 1).to_string(), f.to_string(), a.to_string()])?;
        }
        w.flush()
    }
}

/// `a_N` and a bracket `[a_N, a_N + tail]` for `a`.
///
/// The tail of `G = sum_k p_k(0)` is extrapolated from a least-squares fit
/// of `p_k(0) ~ c_1 k^{-d/2} + c_2 k^{-d/2-1}` over the last decade of
/// nonzero returns, scaled by the fraction of nonzero entries (periodic
/// walks return only at multiples of their period). With `G_N` the partial
/// sum, renewal gives `1 - 1/G_N <= a_N`, so `a - a_N <= T / G_N^2`.
pub fn return_sum(kernel: &Kernel, horizon: u64) -> Result<ReturnSum, WalkError> {
    if horizon == 0 {
        return Err(WalkError::ZeroHorizon);
    }
    let p = origin_return_probs(kernel, horizon);
    let f = renewal_first_returns(&p);
    let a_n: f64 = f[1..].iter().sum();
    let beta = kernel.dim() as f64 / 2.0;
    let tail = if beta <= 1.0 {
        1.0 - a_n
    } else {
        let g_n: f64 = p.iter().sum();
        tail_of_returns(&p, beta) / (g_n * g_n)
    };
    Ok(ReturnSum {
        horizon,
        a_n,
        tail: tail.max(0.0),
        heuristic: true,
        first_returns: f[1..].to_vec(),
    })
}

/// Estimated `sum_{k > N} p_k(0)` for `p_k ~ k^{-beta}`, `beta > 1`.
fn tail_of_returns(p: &[f64], beta: f64) -> f64 {
    let n = p.len() - 1;
    let start = (n / 10).max(1);
    // Periodic walks leave rounding-level values where returns are impossible.
    let floor = 1e-8 * p[start..=n].iter().fold(0.0, |a: f64, &b| a.max(b));
    let window: Vec<(f64, f64)> = (start..=n)
        .filter(|&k| p[k] > floor)
        .map(|k| (k as f64, p[k]))
        .collect();
    if window.len() < 2 {
        return 0.0;
    }
    let density = window.len() as f64 / (n - start + 1) as f64;
    // Relative least squares: minimize sum ((c1 u + c2 v) / p - 1)^2.
    let (mut suu, mut suv, mut svv, mut su, mut sv) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(k, pk) in &window {
        let u = k.powf(-beta) / pk;
        let v = k.powf(-beta - 1.0) / pk;
        suu += u * u;
        suv += u * v;
        svv += v * v;
        su += u;
        sv += v;
    }
    let det = suu * svv - suv * suv;
    let (c1, c2) = if det.abs() > 1e-300 * suu * svv {
        ((su * svv - sv * suv) / det, (sv * suu - su * suv) / det)
    } else {
        (su / suu, 0.0)
    };
    let model = |k: f64| c1 * k.powf(-beta) + c2 * k.powf(-beta - 1.0);
    let stop = 100 * n;
    let mut sum: f64 = (n + 1..=stop).map(|k| model(k as f64)).sum();
    let x = stop as f64 + 0.5;
    sum += c1 * x.powf(1.0 - beta) / (beta - 1.0) + c2 * x.powf(-beta) / beta;
    density * sum
}

/// `nu_n(i)` for the wall that is `height` at the origin and `-inf`
/// elsewhere: `height * sum_{k <= n} f_k(i)` for `i != 0`, `height` at 0.
pub fn nu_closed_form(
    table: &FirstReturnTable,
    height: f64,
    site: &[i64],
    n: u64,
) -> Result<f64, WalkError> {
    if !(height > 0.0) {
        return Err(WalkError::NonpositiveSpike(height));
    }
    if site.iter().all(|&c| c == 0) {
        return Ok(height);
    }
    Ok(height * table.partial_sum(n, site)?)
}

/// `P nu_n(0) = height * sum_{k <= n+1} p_k^{0}(0,0)` for the same spike.
pub fn p_nu_origin(table: &FirstReturnTable, height: f64, n: u64) -> Result<f64, WalkError> {
    if !(height > 0.0) {
        return Err(WalkError::NonpositiveSpike(height));
    }
    Ok(height * table.partial_sum(n + 1, &vec![0; table.window.dim()])?)
}

/// Tolerance of the engine against the closed forms.
pub const ORACLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleParams {
    /// Steps of the `nu` comparison.
    pub horizon: u64,
    /// Number of spike heights, drawn uniformly from `(0, 10]`.
    pub heights: usize,
    /// Sites `|j|_inf <= window` are compared.
    pub window: u64,
    /// Horizon of the return-sum bracket.
    pub return_horizon: u64,
    pub seed: u64,
}

/// Where the engine and the closed form differ most.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleWorst {
    pub height: f64,
    pub step: u64,
    pub site: Vec<i64>,
    pub engine: f64,
    pub closed_form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub horizon: u64,
    pub window: u64,
    /// Side of the engine torus.
    pub side: usize,
    pub heights: Vec<f64>,
    /// Largest `|nu_n(j) - closed form|` over heights, steps and window.
    pub max_deviation: f64,
    /// Largest `|P nu_n(0) - closed form|`.
    pub max_origin_deviation: f64,
    pub worst: Option<OracleWorst>,
    /// Largest `P nu_n(0) / W` seen.
    pub max_ratio: f64,
    pub return_horizon: u64,
    pub a_n: f64,
    pub upper: f64,
    pub heuristic: bool,
    /// Largest gap between first returns of the box recursion and of the
    /// frequency grid.
    pub first_return_gap: f64,
    pub bracket_consistent: bool,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= ORACLE_TOL
            && self.max_origin_deviation <= ORACLE_TOL
            && self.bracket_consistent
    }
}

/// Runs the engine's `nu` recursion for random single spikes and compares
/// it with `nu_closed_form` and `p_nu_origin`, then checks the return-sum
/// bracket against the box recursion and against `P nu_n(0) <= a W`.
pub fn oracle_check(kernel: &Kernel, params: OracleParams) -> Result<(OracleReport, ReturnSum), WalkError> {
    let h = params.horizon;
    if h == 0 || params.return_horizon == 0 {
        return Err(WalkError::ZeroHorizon);
    }
    let v = kernel.range() as u64;
    let table = FirstReturnTable::new(kernel, h + 1, params.window)?;
    let r = table.radius();
    // Images of the spike stay beyond reach of the window for n <= h and of
    // the origin for the averaged value at n = h.
    let side = (v * h + r + 1).max(v * (h + 1) + 1).max(kernel.min_side() as u64) as usize;
    let torus = Torus::new(kernel.dim(), side);
    let window = table.window;
    let sites: Vec<(Vec<i64>, usize)> = (0..window.len())
        .map(|w| {
            let j = window.centered(w);
            let e = torus.index(&j);
            (j, e)
        })
        .collect();
    let sums: Vec<Field> = (1..=h).map(|n| table.partial_sum_field(n)).collect();

    let mut rng = ChaCha8Rng::from_seed(derive_key("oracle", params.seed, 0));
    let heights: Vec<f64> = (0..params.heights).map(|_| 10.0 * (1.0 - rng.random::<f64>())).collect();
    let mut max_dev = 0.0f64;
    let mut max_origin = 0.0f64;
    let mut max_ratio = 0.0f64;
    let mut worst = None;
    for &height in &heights {
        let mut spike = Field::constant(torus, f64::NEG_INFINITY);
        spike.set(&vec![0; torus.dim()], height);
        let mut nu = NuProcess::new(kernel, &WallField::new(spike))?;
        for n in 1..=h {
            nu.step();
            let sum = &sums[n as usize - 1];
            for (w, (j, e)) in sites.iter().enumerate() {
                let expect = if j.iter().all(|&c| c == 0) {
                    height
                } else {
                    height * sum.values()[w]
                };
                let got = nu.state()[*e];
                let dev = (got - expect).abs();
                if !(dev <= max_dev) {
                    max_dev = if dev.is_nan() { f64::INFINITY } else { dev };
                    worst = Some(OracleWorst {
                        height,
                        step: n,
                        site: j.clone(),
                        engine: got,
                        closed_form: expect,
                    });
                }
            }
            let pnu = nu.averaged()[0];
            let dev = (pnu - p_nu_origin(&table, height, n)?).abs();
            max_origin = max_origin.max(dev);
            max_ratio = max_ratio.max(pnu / height);
        }
    }

    let rs = return_sum(kernel, params.return_horizon)?;
    let box_returns = table.origin_returns();
    let gap = box_returns
        .iter()
        .zip(&rs.first_returns)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let a_box: f64 = box_returns.iter().sum();
    let slack = 1e-12;
    let covers = params.return_horizon < h + 1 || a_box <= rs.a_n + slack;
    let bracket_consistent = gap <= ORACLE_TOL
        && covers
        && rs.a_n <= rs.upper()
        && rs.upper() <= 1.0 + slack
        && (kernel.dim() <= 2 || rs.upper() < 1.0)
        && max_ratio <= rs.upper() + slack;
    let report = OracleReport {
        horizon: h,
        window: r,
        side,
        heights,
        max_deviation: max_dev,
        max_origin_deviation: max_origin,
        worst,
        max_ratio,
        return_horizon: params.return_horizon,
        a_n: rs.a_n,
        upper: rs.upper(),
        heuristic: rs.heuristic,
        first_return_gap: gap,
        bracket_consistent,
    };
    Ok((report, rs))
}

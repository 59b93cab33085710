//! Acceptance criteria, one test each. Criteria run one at a time so that
//! runtime limits are measured on an idle machine.
//!
//! The Monte Carlo criteria (5, 6 and 7) run at desk scale by default.
//! `HARNESS_ACCEPTANCE=full` runs them with the stated replicate counts.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serial_harness::cli::run_cli;
use serial_harness::dynamics::{step_w2, step_w3, Init, Mode};
use serial_harness::experiments::{
    bootstrap_fit, estimate_coupled, estimate_growth, fit_exponent, geometric_grid, upper_bound_experiment,
    Averaging, Estimator, GrowthCurve, GrowthSpec, Variant, WallChoice,
};
use serial_harness::lattice::{Field, Kernel, Torus};
use serial_harness::noise::SymmetricLaw;
use serial_harness::properties::{property_check, PropertySetup};
use serial_harness::walk::{oracle_check, return_sum, OracleParams};
use serial_harness::wall::{WallField, WallSpec};

static SERIAL: Mutex<()> = Mutex::new(());

fn full_scale() -> bool {
    std::env::var("HARNESS_ACCEPTANCE").is_ok_and(|v| v == "full")
}

/// Prints the verdict line past the test harness's output capture and
/// fails the test when the criterion does.
fn verdict(name: &str, pass: bool, elapsed: Duration, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let line = format!("[{tag}] {name} ({:.1} s): {detail}\n", elapsed.as_secs_f64());
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "{line}");
}

fn criterion(name: &str, body: impl FnOnce() -> (bool, String)) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let (pass, detail) = body();
    verdict(name, pass, start.elapsed(), detail);
}

#[test]
fn c1_w2_w3_identity() {
    criterion("1 w2/w3 identity", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst = 0.0f64;
        let mut triples = 0;
        for dim in 1..=3 {
            let torus = Torus::new(dim, 5);
            let kernel = Kernel::simple_random_walk(dim);
            for _ in 0..34_000 {
                let draw = |rng: &mut ChaCha8Rng, scale: f64| -> Vec<f64> {
                    (0..torus.len()).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect()
                };
                let state = Field::from_vec(torus, draw(&mut rng, 10.0)).unwrap();
                let mut wall = draw(&mut rng, 10.0);
                for w in wall.iter_mut() {
                    if rng.random_bool(0.1) {
                        *w = f64::NEG_INFINITY;
                    }
                }
                let wall = WallField::new(Field::from_vec(torus, wall).unwrap());
                let noise = draw(&mut rng, 3.0);
                let a = step_w2(&state, &wall, &kernel, &noise).unwrap();
                let b = step_w3(&state, &wall, &kernel, &noise).unwrap();
                for (x, y) in a.values().iter().zip(b.values()) {
                    worst = worst.max((x - y).abs());
                }
                triples += 1;
            }
        }
        let elapsed = start.elapsed();
        let pass = triples >= 100_000 && worst <= 1e-12 && elapsed < Duration::from_secs(10);
        (pass, format!("{triples} triples over d = 1, 2, 3, max |w2 - w3| = {worst:.2e}, limit 1e-12, runtime limit 10 s"))
    });
}

#[test]
fn c2_pathwise_lemmas() {
    criterion("2 pathwise lemma suites", || {
        let start = Instant::now();
        let setup = PropertySetup {
            kernel: Kernel::simple_random_walk(3),
            torus: Torus::new(3, 101),
            steps: 50,
            noise: SymmetricLaw::gaussian(1.0),
            wall: WallSpec::symmetric(SymmetricLaw::gaussian(1.0)).with_atom(0.1),
            seed: 2,
        };
        let report = property_check(&setup, 100).unwrap();
        let elapsed = start.elapsed();
        let fewest = report.instances.values().copied().min().unwrap_or(0);
        let pass = report.passed() && fewest >= 100 && elapsed < Duration::from_secs(300);
        let first = report
            .first_violation()
            .map_or(String::new(), |v| format!(", first violation {v:?}"));
        (
            pass,
            format!(
                "{} suites, at least {fewest} instances each, {} violations, d = 3, L = 101, n = 50, runtime limit 300 s{first}",
                report.instances.len(),
                report.violations.len()
            ),
        )
    });
}

#[test]
fn c3_nu_oracle() {
    criterion("3 nu oracle equivalence", || {
        let start = Instant::now();
        let mut lines = Vec::new();
        let mut pass = true;
        for dim in 1..=3 {
            let params = OracleParams {
                horizon: 100,
                heights: 50,
                window: 10,
                return_horizon: 2000,
                seed: 3,
            };
            let (report, _) = oracle_check(&Kernel::simple_random_walk(dim), params).unwrap();
            let ok = report.passed() && report.max_ratio <= report.upper;
            pass &= ok;
            lines.push(format!(
                "d = {dim}: nu error {:.1e}, P nu error {:.1e}, max P nu / W = {:.6} <= a in [{:.6}, {:.6}]",
                report.max_deviation, report.max_origin_deviation, report.max_ratio, report.a_n, report.upper
            ));
        }
        let elapsed = start.elapsed();
        pass &= elapsed < Duration::from_secs(60);
        (pass, format!("{}; limit 1e-10, runtime limit 60 s", lines.join("; ")))
    });
}

/// `sum_{k <= n} p_k^{0}(0,0)` for the 3d nearest-neighbour walk. The `n`
/// steps split into `k` along the first axis and `n - k` in the plane.
/// The line returns with probability `q_k` and the plane, rotated by 45
/// degrees, with `q_{n-k}^2`. Renewal then turns returns into first
/// returns.
fn srw3_first_return_sum(n: usize) -> f64 {
    let mut lf = vec![0.0f64; n + 1];
    for k in 1..=n {
        lf[k] = libm::lgamma(k as f64 + 1.0);
    }
    let lq = |m: usize| lf[m] - 2.0 * lf[m / 2] - m as f64 * std::f64::consts::LN_2;
    let (l13, l23) = ((1.0f64 / 3.0).ln(), (2.0f64 / 3.0).ln());
    let half = n / 2;
    let mut p = vec![0.0f64; half + 1];
    p[0] = 1.0;
    for m in 1..=half {
        let t = 2 * m;
        // Binomial(t, 1/3) mass outside 12 standard deviations is negligible.
        let centre = t as f64 / 3.0;
        let width = 12.0 * (t as f64 * 2.0 / 9.0).sqrt() + 4.0;
        let lo = ((centre - width).max(0.0) as usize) & !1;
        let hi = ((centre + width) as usize).min(t);
        let mut s = 0.0;
        let mut k = lo;
        while k <= hi {
            let l = lf[t] - lf[k] - lf[t - k] + k as f64 * l13 + (t - k) as f64 * l23 + lq(k) + 2.0 * lq(t - k);
            s += l.exp();
            k += 2;
        }
        p[m] = s;
    }
    let mut f = vec![0.0f64; half + 1];
    let mut a = 0.0;
    for m in 1..=half {
        let conv: f64 = (1..m).map(|j| f[j] * p[m - j]).sum();
        f[m] = p[m] - conv;
        a += f[m];
    }
    a
}

/// `a_N` at `N = 1e5` from `srw3_first_return_sum`, recorded once.
const LONG_HORIZON_A: f64 = 0.339629883011;

/// Watson's value of the return probability of the 3d simple random walk.
const WATSON_A: f64 = 0.340537;

#[test]
fn c4_return_sum_bracket() {
    criterion("4 return-sum constant", || {
        let rs = return_sum(&Kernel::simple_random_walk(3), 2000).unwrap();
        let (lo, hi) = rs.bracket();
        let oracle_2000 = srw3_first_return_sum(2000);
        let oracle_long = srw3_first_return_sum(100_000);
        let pass = rs.width() < 0.01
            && lo <= LONG_HORIZON_A
            && LONG_HORIZON_A <= hi
            && lo <= WATSON_A
            && WATSON_A <= hi
            && (oracle_2000 - lo).abs() < 1e-10
            && (oracle_long - LONG_HORIZON_A).abs() < 1e-11
            && hi < 1.0;
        (
            pass,
            format!(
                "bracket [{lo:.10}, {hi:.10}] width {:.2e} < 0.01, independent a_2000 = {oracle_2000:.10}, \
                 a_1e5 = {oracle_long:.12} (recorded {LONG_HORIZON_A}), Watson {WATSON_A}, a < 1",
                rs.width()
            ),
        )
    });
}

fn growth_spec(side: usize, wall: WallSpec, replicates: u64, estimator: Estimator, seed: u64) -> GrowthSpec {
    GrowthSpec {
        kernel: Kernel::simple_random_walk(3),
        torus: Torus::new(3, side),
        noise: SymmetricLaw::gaussian(1.0),
        wall,
        seed,
        wall_seed: seed + 1,
        times: geometric_grid(4096),
        replicates,
        averaging: Averaging::Annealed,
        estimator,
        mode: Mode::Torus,
    }
}

#[test]
fn c5_free_process_moments() {
    criterion("5 free-process moments", || {
        // The torus adds a zero mode of variance n / L^3 to Var Y_n(0), so
        // L = 31 keeps it to 0.1 by n = 4096. The site average estimates the
        // same two moments as the origin on a torus.
        let (reps, estimator) = if full_scale() {
            (10_000, Estimator::Origin)
        } else {
            (64, Estimator::SiteAverage)
        };
        let start = Instant::now();
        let spec = growth_spec(31, WallSpec::free(), reps, estimator, 5);
        let curve = estimate_growth(&spec).unwrap();
        let elapsed = start.elapsed();
        let worst_z = curve
            .means
            .iter()
            .zip(&curve.ses)
            .map(|(m, s)| (m / s).abs())
            .fold(0.0, f64::max);
        let at = |n: u64| curve.times.iter().position(|&t| t == n).unwrap();
        let (v1024, v4096) = (curve.variance(at(1024)), curve.variance(at(4096)));
        let rise = v4096 / v1024 - 1.0;
        let pass = worst_z <= 4.0 && rise < 0.15 && elapsed < Duration::from_secs(1800);
        (
            pass,
            format!(
                "{reps} replicates ({estimator:?}), L = 31, max |mean| / se = {worst_z:.2} <= 4, \
                 Var at 1024 = {v1024:.4}, at 4096 = {v4096:.4}, rise {:.1}% < 15%, runtime limit 1800 s",
                100.0 * rise
            ),
        )
    });
}

fn strictly_increasing(curve: &GrowthCurve) -> bool {
    curve.means.windows(2).all(|w| w[0] < w[1])
}

#[test]
fn c6_repulsion_ordering() {
    criterion("6 repulsion ordering", || {
        let (reps, estimator) = if full_scale() {
            (10_000, Estimator::Origin)
        } else {
            (200, Estimator::SiteAverage)
        };
        let theta = |t: f64| WallSpec::symmetric(SymmetricLaw::stretched(t, 1.0));
        let zero = estimate_growth(&growth_spec(15, WallSpec::flat(0.0), reps, estimator, 6)).unwrap();
        let half = estimate_growth(&growth_spec(15, theta(0.5), reps, estimator, 6)).unwrap();
        let four = estimate_growth(&growth_spec(15, theta(4.0), reps, estimator, 6)).unwrap();
        let zero_fit = fit_exponent(&zero).unwrap();
        let half_fit = bootstrap_fit(&half, 200, 61).unwrap();
        let four_fit = bootstrap_fit(&four, 200, 62).unwrap();
        let (h_lo, h_hi) = half_fit.ci.unwrap();
        let (f_lo, f_hi) = four_fit.ci.unwrap();
        let increasing = strictly_increasing(&zero);
        let band = (0.3..=0.7).contains(&zero_fit.gamma_inv);
        let ordered = half_fit.gamma_inv > four_fit.gamma_inv && h_lo > f_hi;
        (
            increasing && band && ordered,
            format!(
                "{reps} replicates ({estimator:?}), L = 15, n <= 4096: (a) zero wall increasing: {increasing}, \
                 gamma_inv = {:.3} in [0.3, 0.7]: {band}; (b) theta = 1/2 gamma_inv {:.3} CI [{h_lo:.3}, {h_hi:.3}] \
                 vs theta = 4 gamma_inv {:.3} CI [{f_lo:.3}, {f_hi:.3}], separated: {ordered}",
                zero_fit.gamma_inv, half_fit.gamma_inv, four_fit.gamma_inv
            ),
        )
    });
}

#[test]
fn c7_upper_bound_coupling() {
    criterion("7 upper-bound coupling", || {
        let reps = if full_scale() { 2000 } else { 200 };
        let start = Instant::now();
        let spec = growth_spec(21, WallSpec::symmetric(SymmetricLaw::gaussian(1.0)), reps, Estimator::Origin, 7);
        let reports: Vec<_> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&k| upper_bound_experiment(&spec, k, 1024).unwrap())
            .collect();
        let elapsed = start.elapsed();
        let dominated = reports.iter().all(|r| r.dominance_violations == 0);
        let decouple: Vec<f64> = reports.iter().map(|r| r.p_decouple).collect();
        let monotone = decouple.windows(2).all(|w| w[1] <= w[0]);
        let pass = dominated && monotone && elapsed < Duration::from_secs(1800);
        (
            pass,
            format!(
                "{reps} replicates, L = 21, n = 1024, dominance violations {:?}, \
                 P(decoupled) for K = 1, 2, 4: {decouple:?} nonincreasing: {monotone}, runtime limit 1800 s",
                reports.iter().map(|r| r.dominance_violations).collect::<Vec<_>>()
            ),
        )
    });
}

fn cli(args: &[&str]) -> i32 {
    run_cli(std::iter::once("harness").chain(args.iter().copied()))
}

fn csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let Ok(entries) = fs::read_dir(dir) else {
        return Vec::new();
    };
    let mut out: Vec<_> = entries
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn c8_determinism() {
    criterion("8 determinism", || {
        let dir = tempfile::TempDir::new().unwrap();
        let base = "run.dim = 3\nrun.side = 11\nrun.steps = 64\nrun.replicates = 20\nrun.seed = 8\n\
                    run.mode = \"torus\"\nkernel = \"srw\"\nnoise.family = \"gaussian\"\n";
        let configs = [
            ("simulate", format!("{base}wall.family = \"gaussian\"\nrun.trajectories = 2\n")),
            (
                "sweep",
                format!("{base}wall.family = \"flat\"\nwall.height = 0.0\n[sweep]\nparam = \"wall.height\"\nvalues = [0.0, 1.0]\n"),
            ),
            (
                "sweep",
                format!(
                    "{base}wall.family = \"gaussian\"\n[sweep]\nparam = \"upper_bound.k\"\nvalues = [1.0, 2.0]\n"
                ),
            ),
            (
                "sweep",
                format!("{base}wall.family = \"gaussian\"\n[sweep]\nparam = \"mu.c0\"\nvalues = [0.5, 2.0]\n"),
            ),
            ("oracle-check", format!("{base}wall.family = \"flat\"\nwall.height = 0.0\noracle.return_horizon = 200\n")),
            (
                "property-check",
                format!(
                    "{}wall.family = \"gaussian\"\n",
                    base.replace("run.steps = 64", "run.steps = 5").replace("\"torus\"", "\"exact\"")
                ),
            ),
        ];
        let mut failures = Vec::new();
        let mut checked = 0;
        for (i, (sub, body)) in configs.iter().enumerate() {
            let cfg = dir.path().join(format!("c{i}.toml"));
            fs::write(&cfg, body).unwrap();
            let out = dir.path().join(format!("run{i}"));
            let code = cli(&[sub, "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
            let manifest = out.join(format!("{sub}.manifest.json"));
            let replay = cli(&["replay", manifest.to_str().unwrap()]);
            let same = csvs(&out) == csvs(&out.join("replay"));
            checked += csvs(&out).len();
            if code != 0 || replay != 0 || !same {
                failures.push(format!("{sub} #{i}: exit {code}, replay {replay}, identical {same}"));
            }
            if *sub == "simulate" {
                let fit_out = dir.path().join("fit");
                let growth = out.join("growth.csv");
                let code = cli(&["fit", growth.to_str().unwrap(), "--out-dir", fit_out.to_str().unwrap()]);
                let replay = cli(&["replay", fit_out.join("fit.manifest.json").to_str().unwrap()]);
                if replay != 0 {
                    failures.push(format!("fit: exit {code}, replay {replay}"));
                }
            }
        }
        (
            failures.is_empty(),
            format!("{} runs replayed, {checked} CSVs compared byte for byte; {failures:?}", configs.len() + 1),
        )
    });
}

#[test]
fn coupled_variants_share_noise() {
    // Not a numbered criterion: the coupling that criteria 6 and 7 rely on.
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut spec = growth_spec(7, WallSpec::flat(0.0), 4, Estimator::Origin, 9);
    spec.times = vec![1, 2, 4, 8];
    let v = [
        Variant::new(WallChoice::Sampled, Init::ZeroJoinWall),
        Variant::new(WallChoice::Free, Init::ZeroJoinWall),
    ];
    let curves = estimate_coupled(&spec, &v).unwrap();
    for (z, y) in curves[0].samples.iter().zip(&curves[1].samples) {
        assert!(z.iter().zip(y).all(|(z, y)| z >= y));
    }
}

//! Statistical check of the mean recursion for the hat wall over a sweep
//! of the constant C_0.

use serial_harness::dynamics::Mode;
use serial_harness::experiments::{mu_recursion_check, Averaging, Estimator, GrowthSpec};
use serial_harness::lattice::{Kernel, Torus};
use serial_harness::noise::SymmetricLaw;
use serial_harness::wall::WallSpec;

fn main() {
    let spec = GrowthSpec {
        kernel: Kernel::simple_random_walk(3),
        torus: Torus::new(3, 13),
        noise: SymmetricLaw::gaussian(1.0),
        wall: WallSpec::symmetric(SymmetricLaw::gaussian(1.0)),
        seed: 6,
        wall_seed: 7,
        times: vec![1],
        replicates: 100,
        averaging: Averaging::Annealed,
        estimator: Estimator::SiteAverage,
        mode: Mode::Torus,
    };
    let report = mu_recursion_check(&spec, &[1, 4, 16, 64], &[0.0, 0.5, 1.0, 2.0]).unwrap();
    println!("q = P(W >= 0) = {:.3}", report.q);
    for c in report.checks.iter().filter(|c| c.c0 == 0.5) {
        println!("n = {:>3}: increment {:.5} +- {:.5}, required {:.5}, holds {}", c.n, c.increment, c.se, c.required, c.holds);
    }
    println!("C_0 values that hold everywhere: {:?}, smallest {:?}", report.holding, report.tightest);
}

//! The upper-bound coupling: X from 0 v W, X from r_n v W and the free
//! process from r_n, on shared noise.

use serial_harness::dynamics::Mode;
use serial_harness::experiments::{upper_bound_experiment, Averaging, Estimator, GrowthSpec, UpperBoundReport};
use serial_harness::lattice::{Kernel, Torus};
use serial_harness::noise::SymmetricLaw;
use serial_harness::wall::WallSpec;

fn main() {
    let spec = GrowthSpec {
        kernel: Kernel::simple_random_walk(3),
        torus: Torus::new(3, 15),
        noise: SymmetricLaw::gaussian(1.0),
        wall: WallSpec::symmetric(SymmetricLaw::gaussian(1.0)),
        seed: 4,
        wall_seed: 5,
        times: vec![256],
        replicates: 50,
        averaging: Averaging::Annealed,
        estimator: Estimator::Origin,
        mode: Mode::Torus,
    };
    println!("{}", UpperBoundReport::csv_header().join(","));
    for k in [0.25, 0.5, 1.0, 2.0] {
        let r = upper_bound_experiment(&spec, k, 256).unwrap();
        println!("{}   (a_n = {:.2})", r.csv_row().join(","), r.a_n);
    }
}

//! The pathwise suites on randomized instances, for the engine and for an
//! engine that forgets the wall.

use serial_harness::lattice::{Kernel, Torus};
use serial_harness::noise::SymmetricLaw;
use serial_harness::properties::{property_check, property_check_with_rule, PropertySetup};
use serial_harness::wall::WallSpec;

fn no_wall(x: f64, _w: f64) -> f64 {
    x
}

fn main() {
    let setup = PropertySetup {
        kernel: Kernel::simple_random_walk(3),
        torus: Torus::new(3, 31),
        steps: 15,
        noise: SymmetricLaw::gaussian(1.0),
        wall: WallSpec::symmetric(SymmetricLaw::laplace(1.0)).with_atom(0.1),
        seed: 5,
    };
    let report = property_check(&setup, 20).unwrap();
    for (suite, n) in &report.instances {
        println!("{suite:<30} {n} instances");
    }
    println!("engine: {} violations, max |w2 - w3| = {:.1e}", report.violations.len(), report.max_w2_w3_diff);

    let broken = property_check_with_rule(&setup, 5, no_wall).unwrap();
    let v = broken.first_violation().expect("the mutant is caught");
    println!("wall-free mutant: {} at trial {}, step {}, site {}, excess {:.3}", v.property, v.trial, v.step, v.site, v.excess);
}

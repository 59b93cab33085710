//! One realization of the harness with a random wall, coupled to the free
//! process on the same noise.

use serial_harness::dynamics::{run_coupled, Init, Mode, ProcessConfig, Record};
use serial_harness::lattice::{Kernel, Torus};
use serial_harness::noise::{NoiseStream, SymmetricLaw};
use serial_harness::wall::{sample_wall, WallField, WallSpec};

fn main() {
    let steps = 40;
    let kernel = Kernel::simple_random_walk(3);
    let torus = Torus::new(3, 2 * steps as usize + 1);
    let wall = sample_wall(&WallSpec::symmetric(SymmetricLaw::gaussian(1.0)), 11, 0, torus);
    let noise = NoiseStream::new(SymmetricLaw::gaussian(1.0), 11);
    let config = |wall: WallField| ProcessConfig {
        kernel: kernel.clone(),
        wall,
        init: Init::ZeroJoinWall,
        steps,
        noise: noise.clone(),
        mode: Mode::Exact,
    };
    let runs = run_coupled(&[config(wall), config(WallField::free(torus))], Record::Origin).unwrap();
    let (x, y) = (&runs[0], &runs[1]);
    println!("{:>4} {:>10} {:>10} {:>10}", "n", "X_n(0)", "Y_n(0)", "contacts");
    for n in (0..=steps as usize).step_by(5) {
        println!("{n:>4} {:>10.4} {:>10.4} {:>10}", x.origin[n], y.origin[n], x.wall_contacts[n]);
    }
    assert!(x.origin.iter().zip(&y.origin).all(|(a, b)| a >= b));
    println!("X stays above Y at every step");
}

//! Random walls and the transforms used by the coupling arguments.

use serial_harness::lattice::Torus;
use serial_harness::noise::SymmetricLaw;
use serial_harness::wall::{sample_wall, WallSpec};

fn main() {
    let torus = Torus::new(2, 41);
    let specs = [
        WallSpec::flat(0.0),
        WallSpec::symmetric(SymmetricLaw::gaussian(1.0)),
        WallSpec::symmetric(SymmetricLaw::stretched(0.5, 1.0)),
        WallSpec::symmetric(SymmetricLaw::gaussian(1.0)).with_atom(0.25),
    ];
    for spec in &specs {
        let w = sample_wall(spec, 3, 0, torus);
        let finite = w.values().iter().filter(|v| v.is_finite()).count();
        let r: Vec<String> = [1u64, 5, 20]
            .iter()
            .map(|&n| format!("R_{n} = {:.3}", w.running_max(n, 1).unwrap()))
            .collect();
        println!("{:<48} P(W >= 0) = {:.3}  finite sites {finite}  {}", spec.describe(), spec.prob_nonnegative(), r.join("  "));
    }

    let w = sample_wall(&specs[1], 3, 0, torus);
    let (hat, tilde) = (w.hat(), w.tilde());
    let kept = |f: &serial_harness::wall::WallField| f.values().iter().filter(|v| v.is_finite()).count();
    println!("hat keeps {} sites at 0, tilde keeps {} sites at W", kept(&hat), kept(&tilde));
    let (rest, spike) = w.decompose_at(0);
    println!("decomposed at the origin: spike {:.3}, rest max {:.3}", spike.max(), rest.max());
}

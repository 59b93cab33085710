//! Kernels, tori and the averaging stencil.
//!
//! Builds a lazy walk from explicit weights, applies it to a spike and
//! shows that advancing only the box around the origin gives the same
//! values there as the full stencil.

use std::collections::BTreeMap;

use serial_harness::lattice::{Field, Kernel, KernelSpec, Torus};

fn main() {
    // p(0) = 1/2, p(±e_k) = 1/8 in d = 2.
    let mut weights = BTreeMap::new();
    weights.insert(vec![0, 0], 0.5);
    for e in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
        weights.insert(e.to_vec(), 0.125);
    }
    let lazy = KernelSpec { dim: 2, range: 1, weights }.validate().expect("valid kernel");
    println!("lazy walk: {}", lazy.fingerprint());

    let torus = Torus::new(2, 9);
    let mut f = Field::delta(torus, &[0, 0], 1.0);
    for n in 1..=3 {
        f = lazy.apply(&f).unwrap();
        println!("n = {n}: origin {:.5}, (1,0) {:.5}, mass {:.5}", f.origin(), f.get(&[1, 0]), f.values().iter().sum::<f64>());
    }

    let srw = Kernel::simple_random_walk(3);
    let t3 = Torus::new(3, 11);
    let stencil = srw.stencil(t3).unwrap();
    let src: Vec<f64> = (0..t3.len()).map(|i| (i as f64 * 0.37).sin()).collect();
    let mut full = vec![0.0; t3.len()];
    stencil.apply(&src, &mut full);
    let segments = t3.box_segments(2);
    let mut worst = 0.0f64;
    for (row, cols) in &segments {
        let mut out = vec![0.0; cols.len()];
        stencil.apply_segment(&src, *row, cols.clone(), &mut out);
        let start = row * t3.side() + cols.start;
        for (a, b) in out.iter().zip(&full[start..]) {
            worst = worst.max((a - b).abs());
        }
    }
    println!("box of radius 2: {} segments, max difference from full stencil {worst:e}", segments.len());
}

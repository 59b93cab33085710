//! First returns of the kernel's walk, the transience constant and the
//! closed form of the nu recursion for a single spike.

use serial_harness::lattice::Kernel;
use serial_harness::walk::{nu_closed_form, oracle_check, p_nu_origin, return_sum, FirstReturnTable, OracleParams};

fn main() {
    for dim in 1..=3 {
        let rs = return_sum(&Kernel::simple_random_walk(dim), 2000).unwrap();
        let (lo, hi) = rs.bracket();
        println!("d = {dim}: a in [{lo:.6}, {hi:.6}]");
    }

    let kernel = Kernel::simple_random_walk(3);
    let table = FirstReturnTable::new(&kernel, 30, 3).unwrap();
    for n in [1, 5, 29] {
        println!(
            "spike of height 2: nu_{n}(1,0,0) = {:.6}, P nu_{n}(0) = {:.6}",
            nu_closed_form(&table, 2.0, &[1, 0, 0], n).unwrap(),
            p_nu_origin(&table, 2.0, n).unwrap()
        );
    }

    let params = OracleParams { horizon: 30, heights: 5, window: 3, return_horizon: 500, seed: 1 };
    let (report, _) = oracle_check(&kernel, params).unwrap();
    println!(
        "engine vs closed form: max error {:.1e}, passed {}",
        report.max_deviation,
        report.passed()
    );
}

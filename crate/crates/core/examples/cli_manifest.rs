//! Drives the `harness` command line in-process: a run, its manifest and
//! a replay that regenerates the outputs and compares their hashes.

use std::fs;

use serial_harness::cli::{run_cli, RunManifest};

fn main() {
    let dir = tempfile::TempDir::new().unwrap();
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        "run.dim = 3\nrun.side = 11\nrun.steps = 128\nrun.replicates = 20\nrun.seed = 9\nrun.mode = \"torus\"\n\
         kernel = \"srw\"\nnoise.family = \"gaussian\"\nwall.family = \"flat\"\nwall.height = 0.0\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let code = run_cli(["harness", "simulate", "--config", config.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    println!("simulate exited {code}");

    let path = out.join("simulate.manifest.json");
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    println!("config hash {}", manifest.config_hash.as_deref().unwrap_or("-"));
    for f in &manifest.outputs {
        println!("output {} sha256 {}", f.path, f.sha256);
    }
    let code = run_cli(["harness", "replay", path.to_str().unwrap()]);
    println!("replay exited {code} (0 means byte-identical outputs)");
}

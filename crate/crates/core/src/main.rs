fn main() {
    std::process::exit(serial_harness::cli::run_cli(std::env::args_os()));
}

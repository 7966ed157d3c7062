fn main() {
    std::process::exit(dsap::harness::cli::run(std::env::args()));
}

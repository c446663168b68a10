fn main() {
    std::process::exit(gbsfix::cli::run_cli(std::env::args()));
}

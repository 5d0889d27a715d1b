fn main() {
    std::process::exit(bayesic::cli::run(std::env::args_os()));
}

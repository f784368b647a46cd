fn main() {
    std::process::exit(tausat::cli::run());
}

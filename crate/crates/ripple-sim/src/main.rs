fn main() {
    std::process::exit(ripple_sim::cli::run());
}

fn main() {
    std::process::exit(rarewave::harness::cli::run());
}

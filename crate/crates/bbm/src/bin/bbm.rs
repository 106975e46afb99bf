fn main() {
    std::process::exit(bbm::cli::run());
}

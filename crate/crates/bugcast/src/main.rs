fn main() {
    std::process::exit(bugcast::cli::run());
}

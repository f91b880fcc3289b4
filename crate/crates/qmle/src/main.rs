fn main() {
    std::process::exit(qmle::cli::run());
}

fn main() {
    std::process::exit(faithful::cli::run());
}

fn main() {
    std::process::exit(gsrmev_cli::run());
}

fn main() {
    std::process::exit(agw_cli::run());
}

fn main() {
    std::process::exit(cpdsss::cli::parse_and_dispatch(std::env::args_os()));
}

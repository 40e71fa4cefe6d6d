fn main() {
    std::process::exit(relay_rgg_cli::parse_and_dispatch(std::env::args_os()));
}

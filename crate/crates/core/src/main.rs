fn main() {
    std::process::exit(uasn_cfl::cli::run_from_args(std::env::args_os()));
}

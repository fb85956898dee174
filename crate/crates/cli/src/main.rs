fn main() {
    std::process::exit(conewright_cli::run_from_args(std::env::args_os()));
}

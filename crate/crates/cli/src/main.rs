fn main() {
    std::process::exit(zsl_cli::run_cli(std::env::args_os()));
}

fn main() {
    std::process::exit(taperflow_cli::run_cli(std::env::args_os()));
}

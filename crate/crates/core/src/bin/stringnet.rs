fn main() {
    std::process::exit(stringnet::cli::run_cli(std::env::args_os()));
}

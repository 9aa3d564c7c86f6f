fn main() {
    std::process::exit(loadsense_cli::run_cli(std::env::args_os()));
}

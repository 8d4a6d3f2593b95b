fn main() {
    std::process::exit(negligible_cli::main_with_args(std::env::args_os()));
}

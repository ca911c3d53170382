fn main() {
    std::process::exit(ssag::harness::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(peps_forge::harness::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(kvnlab::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(fdasim::cli::main_with_args(std::env::args_os()));
}

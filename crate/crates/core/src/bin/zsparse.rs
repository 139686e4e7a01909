fn main() {
    std::process::exit(zsparse::cli::main_with_args(std::env::args_os()));
}

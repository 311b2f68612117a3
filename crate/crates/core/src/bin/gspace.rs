fn main() {
    std::process::exit(gspace::cli::main_with_args(std::env::args_os()));
}

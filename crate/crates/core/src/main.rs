fn main() {
    std::process::exit(spinorder::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(stopped_extremes::cli::main_with_args(std::env::args_os()));
}

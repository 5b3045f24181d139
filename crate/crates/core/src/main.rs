fn main() {
    std::process::exit(twoproj::cli::main_with_args(std::env::args_os()));
}

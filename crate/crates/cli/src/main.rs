fn main() {
    std::process::exit(logflatten_cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(resolvent_decay::cli::main_with_args(std::env::args_os()));
}

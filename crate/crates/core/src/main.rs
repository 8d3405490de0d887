fn main() {
    std::process::exit(cogrowth::cli::main_with_args(std::env::args_os()));
}

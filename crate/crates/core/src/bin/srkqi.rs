fn main() {
    std::process::exit(srkqi::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(ldct::cli::main_with_args(std::env::args_os()));
}

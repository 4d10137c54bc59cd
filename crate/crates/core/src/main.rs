fn main() {
    std::process::exit(trimode::cli::main_with_args(std::env::args_os()));
}

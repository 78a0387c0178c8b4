fn main() {
    std::process::exit(skm_core::cli::main_with_args(std::env::args_os()));
}

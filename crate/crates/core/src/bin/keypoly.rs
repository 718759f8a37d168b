fn main() {
    std::process::exit(keypoly_core::cli::main_with(std::env::args_os()));
}

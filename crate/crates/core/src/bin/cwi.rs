fn main() {
    std::process::exit(cwi_core::cli::main_with(std::env::args_os()));
}

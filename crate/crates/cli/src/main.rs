fn main() {
    std::process::exit(pl_cli::main_with(std::env::args_os()));
}

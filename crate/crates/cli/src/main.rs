fn main() {
    std::process::exit(geneprio_cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(affine_limit_cli::run::main_with(std::env::args().collect()));
}

fn main() {
    std::process::exit(toeplitz_minimax_cli::run(std::env::args_os()));
}

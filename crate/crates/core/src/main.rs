fn main() {
    std::process::exit(fracgauss::cli::run(std::env::args_os()));
}

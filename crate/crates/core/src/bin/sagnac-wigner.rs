fn main() {
    std::process::exit(sagnac_wigner::cli::run(std::env::args_os()));
}

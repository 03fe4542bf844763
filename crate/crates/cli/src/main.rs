fn main() {
    std::process::exit(pmc_helix_cli::run(std::env::args_os()));
}

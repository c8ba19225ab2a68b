fn main() {
    std::process::exit(genplasma_cli::run(std::env::args_os()));
}

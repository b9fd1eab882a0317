fn main() {
    std::process::exit(eatseq_cli::run(std::env::args().collect()));
}

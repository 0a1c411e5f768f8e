fn main() {
    std::process::exit(dyncausal::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(acdm::cli::run(std::env::args_os()));
}

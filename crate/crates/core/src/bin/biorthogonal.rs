fn main() {
    std::process::exit(biorthogonal::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(bellmag::cli::run(std::env::args_os()));
}

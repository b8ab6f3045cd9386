fn main() {
    std::process::exit(ermkit::cli::run(std::env::args_os()));
}

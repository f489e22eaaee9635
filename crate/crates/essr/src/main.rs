fn main() {
    std::process::exit(essr::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(commonfix::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(topdog::cli::run(std::env::args_os()));
}

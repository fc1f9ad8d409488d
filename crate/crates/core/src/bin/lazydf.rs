fn main() {
    std::process::exit(lazydf::cli::run(std::env::args_os()));
}

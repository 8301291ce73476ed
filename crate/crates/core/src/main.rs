fn main() {
    std::process::exit(refinable::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(tfdcs::cli::run(std::env::args_os()));
}

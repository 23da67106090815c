fn main() {
    std::process::exit(gazeconf::cli::run(std::env::args_os()));
}

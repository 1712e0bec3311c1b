fn main() {
    std::process::exit(grant_contest::cli::run(std::env::args_os()));
}

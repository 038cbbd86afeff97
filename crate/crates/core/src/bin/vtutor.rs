fn main() {
    std::process::exit(vtutor::cli::run(std::env::args_os()));
}

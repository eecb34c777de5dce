fn main() {
    std::process::exit(jetmorse_cli::run(std::env::args_os()));
}

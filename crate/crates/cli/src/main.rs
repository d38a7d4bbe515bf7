fn main() {
    std::process::exit(pacing_cli::run(std::env::args_os()));
}

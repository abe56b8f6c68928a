fn main() {
    std::process::exit(goodwill_cli::run(std::env::args_os()));
}

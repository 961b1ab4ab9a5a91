fn main() {
    std::process::exit(morsecover_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(expsynth::cli::run(std::env::args_os()));
}

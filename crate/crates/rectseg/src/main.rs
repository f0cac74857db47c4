fn main() {
    std::process::exit(rectseg::cli::run(std::env::args_os()));
}

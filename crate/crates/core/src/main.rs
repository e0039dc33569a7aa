fn main() {
    std::process::exit(helmpml::experiments::cli::run(std::env::args_os()));
}

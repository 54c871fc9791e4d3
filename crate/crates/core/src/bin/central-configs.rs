fn main() {
    std::process::exit(central_configs::cli::run(std::env::args_os()));
}

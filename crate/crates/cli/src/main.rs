fn main() {
    std::process::exit(biofilm_cli::run(std::env::args_os()));
}

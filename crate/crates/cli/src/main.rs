fn main() {
    std::process::exit(orbitkit_cli::run(std::env::args_os()));
}

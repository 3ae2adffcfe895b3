fn main() {
    std::process::exit(erdim_cli::run(std::env::args_os()));
}

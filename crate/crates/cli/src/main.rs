fn main() {
    std::process::exit(tml_cli::run(std::env::args_os()));
}

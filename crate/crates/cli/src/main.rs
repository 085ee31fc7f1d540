fn main() {
    std::process::exit(rwvd_cli::run(std::env::args_os()));
}

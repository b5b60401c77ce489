fn main() {
    std::process::exit(spfc_cli::app::run(std::env::args_os()));
}

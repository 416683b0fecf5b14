fn main() {
    std::process::exit(stag::app::run_cli(std::env::args_os()));
}

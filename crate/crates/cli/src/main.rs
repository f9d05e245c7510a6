fn main() {
    std::process::exit(bandspec_cli::main_with_args(std::env::args_os()));
}

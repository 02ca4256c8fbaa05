fn main() {
    std::process::exit(sdiv_cli::args::main_with_args(std::env::args_os()));
}

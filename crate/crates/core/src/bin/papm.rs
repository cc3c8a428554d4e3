fn main() {
    std::process::exit(papm::cli::main_with_args(std::env::args_os()));
}

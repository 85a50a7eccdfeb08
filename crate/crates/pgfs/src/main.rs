fn main() {
    std::process::exit(pgfs::cli::main_with_args(std::env::args_os()));
}

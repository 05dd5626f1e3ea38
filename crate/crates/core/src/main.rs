fn main() {
    std::process::exit(symbreak::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(dadcert::cli::run(std::env::args_os()));
}

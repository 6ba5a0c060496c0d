fn main() {
    std::process::exit(qadd::cli::run(std::env::args_os()));
}

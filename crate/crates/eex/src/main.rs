fn main() {
    std::process::exit(eex::cli::run(std::env::args_os()));
}

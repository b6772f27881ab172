fn main() {
    std::process::exit(kgws::cli::run_from(std::env::args_os()));
}

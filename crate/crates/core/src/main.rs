fn main() {
    std::process::exit(reconstruct::cli::run(std::env::args_os()));
}

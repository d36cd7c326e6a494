fn main() {
    std::process::exit(coarsecat::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(cutoff_lab::cli::run(std::env::args_os()));
}

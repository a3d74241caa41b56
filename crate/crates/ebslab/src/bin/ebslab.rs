fn main() {
    std::process::exit(ebslab::cli::run_from(std::env::args_os()));
}

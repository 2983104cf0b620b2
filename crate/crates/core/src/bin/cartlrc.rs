fn main() {
    std::process::exit(cartlrc::cli::run(std::env::args_os()));
}

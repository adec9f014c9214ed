fn main() {
    std::process::exit(spinrep::cli::cli_main(std::env::args_os()));
}

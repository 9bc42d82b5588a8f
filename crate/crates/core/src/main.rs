fn main() {
    std::process::exit(femto_auction::cli::run(std::env::args_os()));
}

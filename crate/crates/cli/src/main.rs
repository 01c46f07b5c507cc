fn main() {
    std::process::exit(liouville_cli::run(std::env::args_os().skip(1)));
}

fn main() {
    std::process::exit(twdm::cli::main(std::env::args_os()));
}

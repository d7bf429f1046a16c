fn main() {
    std::process::exit(greenfcc::cli::main());
}

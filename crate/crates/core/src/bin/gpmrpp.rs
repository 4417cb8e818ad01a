fn main() {
    std::process::exit(gpmrpp::cli::main());
}

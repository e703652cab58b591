fn main() {
    std::process::exit(bkw::cli::main());
}

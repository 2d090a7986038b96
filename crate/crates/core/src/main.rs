fn main() {
    std::process::exit(geocast::cli::main());
}

fn main() {
    std::process::exit(armchair_core::cli::main());
}

fn main() {
    std::process::exit(minicminor::cli::main());
}

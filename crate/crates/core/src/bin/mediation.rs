fn main() {
    std::process::exit(mediation::cli::main());
}

fn main() {
    std::process::exit(weakmeas::cli::main());
}

fn main() {
    std::process::exit(mbtop::cli::main());
}

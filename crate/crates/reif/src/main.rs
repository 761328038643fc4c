fn main() {
    std::process::exit(reif::cli::main_entry());
}

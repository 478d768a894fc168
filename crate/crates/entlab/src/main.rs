fn main() {
    std::process::exit(entlab::cli::main_entry());
}

fn main() {
    std::process::exit(echomem::cli::main_from_env());
}

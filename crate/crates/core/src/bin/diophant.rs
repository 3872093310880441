fn main() {
    std::process::exit(diophant::cli::main_with_env());
}

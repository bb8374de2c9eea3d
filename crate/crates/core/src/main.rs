fn main() {
    let code = caratheodory::cli::main_with_env();
    std::process::exit(code);
}

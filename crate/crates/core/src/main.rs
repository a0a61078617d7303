fn main() {
    std::process::exit(fastdcov::cli::main_with_std());
}

fn main() {
    std::process::exit(fracevo_cli::run_from_env());
}

fn main() {
    std::process::exit(chronolog::run_cli());
}

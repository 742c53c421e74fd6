fn main() {
    let code = adapterforge::cli::run(std::env::args_os());
    std::process::exit(code);
}

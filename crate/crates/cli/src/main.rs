fn main() {
    let code = nlkg_kam_cli::dispatch(std::env::args_os());
    std::process::exit(code);
}

fn main() {
    let code = powerlog::cli::run(
        std::env::args_os(),
        Box::new(std::io::stdin()),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    std::process::exit(code);
}

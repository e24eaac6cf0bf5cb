fn main() {
    std::process::exit(sbk::cli::run(std::env::args_os(), &mut std::io::stdout().lock()));
}

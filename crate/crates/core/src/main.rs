fn main() {
    std::process::exit(tfseg::cli::run(std::env::args_os()));
}

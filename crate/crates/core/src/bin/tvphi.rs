fn main() {
    std::process::exit(tvphi::cli::run(std::env::args_os()));
}

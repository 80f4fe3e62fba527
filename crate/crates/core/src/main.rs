fn main() {
    std::process::exit(fppm::cli::run(std::env::args_os()));
}

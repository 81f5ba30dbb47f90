fn main() {
    std::process::exit(quadnorm::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(pathdensity::cli::run(std::env::args_os()));
}

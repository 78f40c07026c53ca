fn main() {
    std::process::exit(lbverify::cli::run(std::env::args_os()));
}

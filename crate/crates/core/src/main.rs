fn main() {
    std::process::exit(fairscope::cli::run(std::env::args_os()));
}

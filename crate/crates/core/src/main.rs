fn main() {
    std::process::exit(siegelkit::cli::run(std::env::args_os()));
}

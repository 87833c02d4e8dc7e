fn main() {
    std::process::exit(mfpencil::cli::run(std::env::args_os()));
}

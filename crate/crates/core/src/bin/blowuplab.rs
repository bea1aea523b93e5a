fn main() {
    std::process::exit(blowuplab::cli::dispatch(std::env::args_os()));
}

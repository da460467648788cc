fn main() {
    std::process::exit(ssdlab_cli::run(std::env::args_os()));
}

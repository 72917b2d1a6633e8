fn main() {
    std::process::exit(metactl_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(panoptic_cli::run(std::env::args()));
}

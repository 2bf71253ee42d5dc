fn main() {
    std::process::exit(rmimo::harness::cli_main(std::env::args()));
}

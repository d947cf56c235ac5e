fn main() {
    std::process::exit(ellipcenters_harness::cli::cli_main(std::env::args_os()));
}

fn main() {
    std::process::exit(synthseg::cli::cli_main(std::env::args_os()));
}

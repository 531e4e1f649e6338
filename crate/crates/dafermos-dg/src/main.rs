fn main() {
    std::process::exit(dafermos_dg::cli::main_with_args(std::env::args().skip(1)));
}

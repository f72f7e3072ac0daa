fn main() {
    std::process::exit(qcapwit::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(qds_forge::run(std::env::args_os()));
}

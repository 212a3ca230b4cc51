fn main() {
    std::process::exit(krext::run(std::env::args_os()));
}

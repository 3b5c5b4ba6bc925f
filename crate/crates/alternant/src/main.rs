fn main() {
    std::process::exit(alternant::run(std::env::args_os()));
}

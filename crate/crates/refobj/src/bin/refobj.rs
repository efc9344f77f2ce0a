fn main() {
    std::process::exit(refobj::run_command(std::env::args_os()));
}

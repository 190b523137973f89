fn main() {
    std::process::exit(kovtop::main_with_args(std::env::args_os()));
}

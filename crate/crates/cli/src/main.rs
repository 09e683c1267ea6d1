fn main() {
    std::process::exit(staticprop_cli::main_with(std::env::args_os()));
}

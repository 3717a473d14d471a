fn main() {
    std::process::exit(bipolar_relax::cli::main_with(std::env::args_os()));
}

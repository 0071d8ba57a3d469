fn main() {
    std::process::exit(slabperc::cli::main_with(std::env::args_os()));
}

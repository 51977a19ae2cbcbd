fn main() -> std::process::ExitCode {
    daisy::cli::main_with(std::env::args_os())
}

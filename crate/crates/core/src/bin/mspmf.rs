fn main() -> std::process::ExitCode {
    mspmf::cli::run(std::env::args_os())
}

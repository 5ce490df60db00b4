fn main() -> std::process::ExitCode {
    so_lab::cli::main()
}

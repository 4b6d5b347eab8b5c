fn main() -> std::process::ExitCode {
    cwd::cli::main()
}

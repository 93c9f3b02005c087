fn main() -> std::process::ExitCode {
    daa_waitmap::cli::main()
}

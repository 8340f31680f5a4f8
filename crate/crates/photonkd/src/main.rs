fn main() -> std::process::ExitCode {
    photonkd::cli::main()
}

fn main() -> std::process::ExitCode {
    specgeo::cli::main()
}

fn main() -> std::process::ExitCode {
    geoqsl::cli::main()
}

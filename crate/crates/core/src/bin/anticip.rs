use std::process::ExitCode;

fn main() -> ExitCode {
    anticip_core::cli::main()
}

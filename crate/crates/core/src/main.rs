use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(tropbundle::cli::main_entry() as u8)
}

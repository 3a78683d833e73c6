use std::process::ExitCode;

fn main() -> ExitCode {
    match levarray::run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("levarray: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

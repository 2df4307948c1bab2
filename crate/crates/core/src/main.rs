use std::process::ExitCode;

fn main() -> ExitCode {
    let mut stdout = std::io::stdout().lock();
    match lsc::cli::run(std::env::args_os(), &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(lsc::cli::CliError::VerifyFailed) => ExitCode::from(4),
        Err(e) => {
            eprintln!("lsc: {}", e.to_string().trim_end());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

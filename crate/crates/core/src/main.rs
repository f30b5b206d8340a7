use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    match relaybound::cli::run(std::env::args_os()) {
        Ok(out) => {
            if out.path.is_none() {
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(out.text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                    return ExitCode::from(1);
                }
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            if f.code == 0 {
                print!("{}", f.message);
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", f.message.trim_end());
            ExitCode::from(f.code as u8)
        }
    }
}

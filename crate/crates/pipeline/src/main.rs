use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::init();
    match i2i_pipeline::cli::run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn main() {
    if let Err(e) = phidro_cli::run(std::env::args_os()) {
        match &e {
            phidro_cli::CliError::Usage(msg) if msg.starts_with("error:") => eprint!("{msg}"),
            _ => eprintln!("phidro: {e}"),
        }
        std::process::exit(e.exit_code());
    }
}

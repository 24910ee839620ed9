use clap::Parser;

fn main() {
    let cli = qpv_cli::Cli::parse();
    match qpv_cli::execute(&cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}

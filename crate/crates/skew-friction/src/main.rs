use clap::Parser;

fn main() {
    let cli = skew_friction::cli::Cli::parse();
    match skew_friction::cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}

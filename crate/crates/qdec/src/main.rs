use clap::Parser;

fn main() {
    let cli = qdec::cli::Cli::parse();
    match qdec::cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}

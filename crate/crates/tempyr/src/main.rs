use clap::Parser;

fn main() -> anyhow::Result<()> {
    let cli = tempyr::cli::Cli::parse();
    for path in tempyr::cli::run(cli)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

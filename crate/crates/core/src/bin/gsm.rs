use clap::Parser;

fn main() -> anyhow::Result<()> {
    gsm::cli::run(gsm::cli::Cli::parse())
}

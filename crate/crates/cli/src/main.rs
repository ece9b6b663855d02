use clap::Parser;
use ledgerlens_cli::commands::{
    emit_json, run_evaluate, run_generate, run_score, run_sweep, run_train,
};
use ledgerlens_cli::exit_code;
use ledgerlens_cli::opts::{Cli, Command};
use ledgerlens_core::Result;

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => emit_json(&run_generate(args)?),
        Command::Train(args) => emit_json(&run_train(args)?),
        Command::Score(args) => emit_json(&run_score(args)?),
        Command::Evaluate(args) => emit_json(&run_evaluate(args)?),
        Command::Sweep(args) => {
            let report = run_sweep(args)?;
            emit_json(&serde_json::json!({
                "n": report.n,
                "k": report.k,
                "legs": report.legs.len(),
                "failed": report.legs.iter().filter(|l| l.status == "failed").count(),
            }))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(&cli) {
        eprintln!("error: {error}");
        std::process::exit(exit_code(&error));
    }
}

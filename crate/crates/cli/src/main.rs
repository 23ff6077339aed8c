//! `cotsig`: exit status 0 on success, 1 on usage errors, 2 on data errors
//! (missing or malformed input, bad config), 3 on runtime failures.

mod args;
mod run;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, SentimentCommand};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match &cli.command {
        Command::Ingest(a) => run::ingest(a),
        Command::Features(a) => run::features(a),
        Command::Lexicon(a) => run::lexicon(a),
        Command::Train(a) => run::train(a),
        Command::Evaluate(a) => run::evaluate(a),
        Command::Heuristics(a) => run::heuristics(a),
        Command::Calibration(a) => run::calibration(a),
        Command::Report(a) => run::report(a),
        Command::Sentiment(SentimentCommand::Attach(a)) => run::attach(a),
        #[cfg(feature = "http")]
        Command::Sentiment(SentimentCommand::Score(a)) => run::score(a),
        Command::Synth(a) => run::synth(a),
    };
    if let Err(f) = result {
        eprintln!("error: {}", f.message);
        std::process::exit(f.code);
    }
}

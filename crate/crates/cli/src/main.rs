mod cli;
mod commands;
mod config;
mod pipeline;

use std::fs::OpenOptions;
use std::io::Write as _;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{CommandFactory, FromArgMatches};
use dnf_core::dnf::TrainMode;
use dnf_core::{Error, ErrorClass, FORMAT_MAGICS};
use serde_json::json;

use cli::{Cli, Command, PipelineAction};
use commands::Run;
use config::{parse_config, Resolver};

fn version() -> String {
    format!("{} (formats {})", env!("CARGO_PKG_VERSION"), FORMAT_MAGICS.join(" "))
}

fn version_static() -> &'static str {
    Box::leak(version().into_boxed_str())
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Usage => 1,
        ErrorClass::Data => 2,
        ErrorClass::Numeric => 3,
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Synth(_) => "synth",
        Command::Split(_) => "split",
        Command::MakeTrials(_) => "make-trials",
        Command::Stats(_) => "stats",
        Command::SubgroupStats(_) => "subgroup-stats",
        Command::TrainNf(_) => "train-nf",
        Command::TrainDnf(_) => "train-dnf",
        Command::FitLda(_) => "fit-lda",
        Command::FitLdan(_) => "fit-ldan",
        Command::FitWhiten(_) => "fit-whiten",
        Command::FitPlda(_) => "fit-plda",
        Command::Transform(_) => "transform",
        Command::Score(_) => "score",
        Command::Eval(_) => "eval",
        Command::Pipeline { .. } => "pipeline run",
    }
}

fn dispatch(command: Command, run: &mut Run) -> dnf_core::Result<()> {
    match command {
        Command::Synth(a) => commands::synth(a, run),
        Command::Split(a) => commands::split(a, run),
        Command::MakeTrials(a) => commands::make_trials_cmd(a, run),
        Command::Stats(a) => commands::stats(a, run),
        Command::SubgroupStats(a) => commands::subgroup_stats(a, run),
        Command::TrainNf(a) => commands::train_cmd(a, TrainMode::VanillaNf, run),
        Command::TrainDnf(a) => commands::train_cmd(a, TrainMode::Dnf, run),
        Command::FitLda(a) => commands::fit_lda(a, run),
        Command::FitLdan(a) => commands::fit_ldan(a, run),
        Command::FitWhiten(a) => commands::fit_whiten(a, run),
        Command::FitPlda(a) => commands::fit_plda(a, run),
        Command::Transform(a) => commands::transform(a, run),
        Command::Score(a) => commands::score(a, run),
        Command::Eval(a) => commands::eval(a, run),
        Command::Pipeline {
            action: PipelineAction::Run(a),
        } => pipeline::run_pipeline(a, run),
    }
}

fn load_config(path: Option<&str>) -> dnf_core::Result<Resolver> {
    match path {
        None => Ok(Resolver::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                Error::Io(std::io::Error::new(e.kind(), format!("config file {p}: {e}")))
            })?;
            Ok(Resolver::new(parse_config(&text, p)?))
        }
    }
}

fn append_log(path: &str, entry: &serde_json::Value) {
    let res = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .and_then(|mut f| writeln!(f, "{entry}"));
    if let Err(e) = res {
        eprintln!("warning: cannot append run log {path}: {e}");
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let matches = match Cli::command().version(version_static()).try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };

    let name = command_name(&cli.command);
    let started = Instant::now();
    let mut run = Run::default();
    let result = load_config(cli.config.as_deref()).and_then(|r| {
        run.r = r;
        dispatch(cli.command, &mut run)
    });
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {name}: {e}");
            exit_code(e)
        }
    };

    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    append_log(
        &cli.run_log,
        &json!({
            "timestamp": timestamp,
            "command": name,
            "version": env!("CARGO_PKG_VERSION"),
            "config_hash": run.r.hash(name),
            "config": run.r.resolved(),
            "seed": run.seed,
            "wall_time_s": started.elapsed().as_secs_f64(),
            "status": if code == 0 { "ok" } else { "error" },
            "exit_code": code,
            "error": result.as_ref().err().map(|e| e.to_string()),
            "outputs": run.outputs,
        }),
    );
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(exit_code(&Error::InvalidConfig("x".into())), 1);
        assert_eq!(exit_code(&Error::MissingClass(3)), 2);
        assert_eq!(exit_code(&Error::NumericOverflow { block: 0 }), 3);
        assert_eq!(exit_code(&Error::IterationLimit { sweeps: 1 }), 3);
    }

    #[test]
    fn version_lists_formats() {
        let v = version();
        for m in FORMAT_MAGICS {
            assert!(v.contains(m));
        }
    }

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}

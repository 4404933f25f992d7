mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Check, Resolved, Settings};
use diffext::verify::{self, JacobiSuite, ProbeSpec, Report};

#[derive(Parser)]
#[command(name = "diffext", version, about = "Exact verification campaigns for extended diffeomorphism algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one check, or all of them.
    Verify {
        #[arg(value_enum)]
        check: Check,
        /// TOML file with default settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
}

fn probe_spec(r: &Resolved) -> ProbeSpec {
    let base = if r.trivial { ProbeSpec::trivial(r.dim) } else { ProbeSpec::induced(r.params.clone(), r.weight.clone()) };
    let mut spec = base.with_window(r.deg, r.freq, r.max_degree, r.max_width);
    spec.seed = r.seed;
    spec
}

fn run(check: Check, r: &Resolved) -> Vec<Report> {
    let spec = probe_spec(r);
    match check {
        Check::Realization => vec![verify::check_realization(&spec)],
        Check::Temporal => vec![verify::check_temporal_virasoro(&spec, r.mmax)],
        Check::Action => vec![verify::check_action_brackets(&spec, r.rank)],
        Check::Abelian => vec![verify::check_abelian(&spec, 1, 1, 2)],
        Check::Gauge => vec![verify::check_gauge(&spec)],
        Check::QTransform => vec![verify::check_q_transform(&spec, r.freq as i32)],
        Check::Hamiltonian => vec![verify::check_hamiltonian(&spec)],
        Check::Jacobi => {
            let suite = JacobiSuite { deg: r.deg, freq: r.freq, draws: r.draws, seed: r.seed, ..JacobiSuite::new(r.dim) };
            vec![verify::check_jacobi(&suite)]
        }
        Check::Coboundary => vec![verify::check_coboundary(r.dim, r.deg, r.freq, r.draws, r.seed)],
        Check::Chain => vec![verify::check_exact_chain(r.dim, r.deg, r.freq)],
        Check::Currents => vec![verify::check_current_jacobi(&r.params, r.window)],
        Check::Delta => vec![verify::check_delta_lemma(r.kmax)],
        Check::Jet => vec![verify::check_jet_lemma(r.dim, r.cutoff, r.deg, r.freq, r.trials, r.seed)],
        Check::All => {
            let mut checks = vec![
                Check::Delta,
                Check::Jet,
                Check::Currents,
                Check::Chain,
                Check::Coboundary,
                Check::Jacobi,
                Check::Hamiltonian,
                Check::QTransform,
                Check::Abelian,
                Check::Action,
                Check::Temporal,
                Check::Realization,
            ];
            if !r.trivial && r.params.gauge.dim() > 0 {
                checks.push(Check::Gauge);
            }
            checks.into_iter().flat_map(|c| run(c, r)).collect()
        }
    }
}

fn configure_workers() -> Result<(), String> {
    if let Ok(v) = std::env::var("DIFFEXT_WORKERS") {
        let n: usize = v.parse().map_err(|_| format!("DIFFEXT_WORKERS={v:?} is not a number"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Verify { check, config, settings } = cli.command;
    let resolved = (|| {
        configure_workers()?;
        let base = match &config {
            Some(p) => Settings::load(p)?,
            None => Settings::default(),
        };
        settings.over(base).resolve()
    })();
    let r = match resolved {
        Ok(r) => r,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    let reports = run(check, &r);
    print!("{}", report::summary(&reports, r.timing));
    if let Some(path) = &r.out {
        let text = serde_json::to_string_pretty(&report::campaign_json(&reports, r.timing)).expect("serializable");
        if let Err(e) = std::fs::write(path, text + "\n") {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    match reports.iter().find(|r| !r.pass) {
        None => ExitCode::SUCCESS,
        Some(f) => {
            eprintln!("check {} failed", f.check);
            ExitCode::from(1)
        }
    }
}

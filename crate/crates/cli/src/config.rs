use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use diffext::current::{CurrentParams, GaugeAlgebra, HighestWeight};
use diffext::GaussianRational as Gq;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    All,
    Realization,
    Temporal,
    Action,
    Abelian,
    Gauge,
    QTransform,
    Hamiltonian,
    Jacobi,
    Coboundary,
    Chain,
    Currents,
    Delta,
    Jet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModuleKind {
    Trivial,
    Induced,
}

/// Settings shared by the command line and the TOML file. Every field is
/// optional; command-line values override file values.
#[derive(Debug, Clone, Default, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Spacetime dimension N.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub dim: Option<usize>,
    /// Module tensored with the Fock space; induced whenever current
    /// parameters are given, trivial otherwise.
    #[arg(long, value_enum)]
    pub module: Option<ModuleKind>,
    /// Virasoro central charge of the currents.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub k0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub k1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub k2: Option<String>,
    /// Gauge algebra: none, sl2 or u1:<d>.
    #[arg(long)]
    pub gauge: Option<String>,
    /// Kac-Moody level k.
    #[arg(long, allow_hyphen_values = true)]
    pub level: Option<String>,
    /// Comma-separated charges g^a.
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<String>,
    /// Comma-separated charges g'^a.
    #[arg(long, allow_hyphen_values = true)]
    pub gprime: Option<String>,
    /// Lowest L_0 eigenvalue h.
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<String>,
    /// Eigenvalue of the diagonal T_0.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Comma-separated gauge character.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    /// Spatial degree bound of probe fields.
    #[arg(long)]
    pub deg: Option<u32>,
    /// Frequency bound of probe fields.
    #[arg(long)]
    pub freq: Option<u32>,
    /// Degree cap of basis states.
    #[arg(long = "D")]
    #[serde(rename = "D")]
    pub max_degree: Option<u32>,
    /// Width cap of basis states.
    #[arg(long = "W")]
    #[serde(rename = "W")]
    pub max_width: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Frequency range of the delta identities.
    #[arg(long)]
    pub kmax: Option<i64>,
    /// Mode cutoff of truncated loops.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub cutoff: Option<u32>,
    /// Random draws for the jet identities.
    #[arg(long)]
    pub trials: Option<u32>,
    /// Random parameter draws for the Jacobi and coboundary checks.
    #[arg(long)]
    pub draws: Option<u32>,
    /// Highest frequency m of the temporal probes.
    #[arg(long)]
    pub mmax: Option<i32>,
    /// Highest rank of ideal symbols.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Frequency window of the current Jacobi check.
    #[arg(long)]
    pub window: Option<u32>,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include wall-clock times in reports.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub timing: Option<bool>,
}

impl Settings {
    pub fn load(path: &Path) -> Result<Settings, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// `self` with unset fields taken from `base`.
    pub fn over(self, base: Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: self.$f.or(base.$f)),* } };
        }
        pick!(
            dim, module, c, k0, k1, k2, gauge, level, g, gprime, h, lambda, mu, deg, freq, max_degree, max_width, seed, kmax,
            cutoff, trials, draws, mmax, rank, window, out, timing
        )
    }
}

fn scalar(name: &str, v: &Option<String>) -> Result<Gq, String> {
    match v {
        None => Ok(Gq::zero()),
        Some(s) => s.trim().parse().map_err(|e| format!("--{name} {s:?}: {e}")),
    }
}

fn list(name: &str, v: &Option<String>, len: usize) -> Result<Vec<Gq>, String> {
    match v {
        None => Ok(vec![Gq::zero(); len]),
        Some(s) => {
            let out: Vec<Gq> = s.split(',').map(|x| x.trim().parse()).collect::<Result<_, _>>().map_err(|e| format!("--{name} {s:?}: {e}"))?;
            if out.len() != len {
                return Err(format!("--{name}: expected {len} values, got {}", out.len()));
            }
            Ok(out)
        }
    }
}

/// Fully resolved campaign configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub dim: usize,
    pub trivial: bool,
    pub params: CurrentParams,
    pub weight: HighestWeight,
    pub deg: u32,
    pub freq: u32,
    pub max_degree: u32,
    pub max_width: usize,
    pub seed: u64,
    pub kmax: i64,
    pub cutoff: u32,
    pub trials: u32,
    pub draws: u32,
    pub mmax: i32,
    pub rank: usize,
    pub window: u32,
    pub out: Option<PathBuf>,
    pub timing: bool,
}

impl Settings {
    pub fn resolve(&self) -> Result<Resolved, String> {
        let dim = self.dim.unwrap_or(2);
        if dim < 2 {
            return Err("--N must be at least 2".into());
        }
        let gauge = GaugeAlgebra::parse(self.gauge.as_deref().unwrap_or("none")).map_err(|e| e.to_string())?;
        let gd = gauge.dim();
        let params = CurrentParams::new(
            dim,
            scalar("c", &self.c)?,
            scalar("k0", &self.k0)?,
            scalar("k1", &self.k1)?,
            scalar("k2", &self.k2)?,
            gauge,
            scalar("level", &self.level)?,
            list("g", &self.g, gd)?,
            list("gprime", &self.gprime, gd)?,
        )
        .map_err(|e| e.to_string())?;
        let weight = HighestWeight::new(scalar("h", &self.h)?, scalar("lambda", &self.lambda)?, list("mu", &self.mu, gd)?, &params)
            .map_err(|e| e.to_string())?;
        let given = [&self.c, &self.k0, &self.k1, &self.k2, &self.gauge, &self.level, &self.h, &self.lambda].iter().any(|v| v.is_some());
        let trivial = match self.module {
            Some(ModuleKind::Trivial) => {
                if given {
                    return Err("current parameters given for the trivial module".into());
                }
                true
            }
            Some(ModuleKind::Induced) => false,
            None => !given,
        };
        Ok(Resolved {
            dim,
            trivial,
            params,
            weight,
            deg: self.deg.unwrap_or(2),
            freq: self.freq.unwrap_or(2),
            max_degree: self.max_degree.unwrap_or(4),
            max_width: self.max_width.unwrap_or(if dim == 2 { 4 } else { 3 }),
            seed: self.seed.unwrap_or(0),
            kmax: self.kmax.unwrap_or(50).max(1),
            cutoff: self.cutoff.unwrap_or(2).max(1),
            trials: self.trials.unwrap_or(20),
            draws: self.draws.unwrap_or(5),
            mmax: self.mmax.unwrap_or(3),
            rank: self.rank.unwrap_or(3),
            window: self.window.unwrap_or(3),
            out: self.out.clone(),
            timing: self.timing.unwrap_or(false),
        })
    }
}

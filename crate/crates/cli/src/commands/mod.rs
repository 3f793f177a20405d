//! The seven workflows. Each reads the resolved [`Ctx`], writes its files
//! into the output directory and returns the list of file names.

mod brightness;
mod budget;
mod g2;
mod lifetime;
mod purcell;
mod saturation;
mod spectrum;

use std::fs;
use std::path::{Path, PathBuf};

use pl_core::fixtures::{FixtureSet, Measurements};
use pl_core::spectra::EmitterModel;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub use brightness::BrightnessReport;
pub use budget::BudgetReport;
pub use g2::G2Report;
pub use lifetime::LifetimeReport;
pub use purcell::PurcellReport;
pub use saturation::SaturationReport;
pub use spectrum::SpectrumReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Spectrum,
    Purcell,
    Brightness,
    Lifetime,
    Saturation,
    G2,
    Budget,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Purcell => "purcell",
            Command::Brightness => "brightness",
            Command::Lifetime => "lifetime",
            Command::Saturation => "saturation",
            Command::G2 => "g2",
            Command::Budget => "budget",
        }
    }
}

/// Everything a command needs, resolved from the config and flags.
pub struct Ctx {
    pub cfg: RunConfig,
    pub emitter: EmitterModel,
    pub fixture: Option<FixtureSet>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub pool: rayon::ThreadPool,
    written: Vec<String>,
}

impl Ctx {
    pub fn new(cfg: RunConfig, fixture: Option<FixtureSet>, out_dir: PathBuf, seed: u64, parallel: usize) -> CliResult<Self> {
        if parallel == 0 {
            return Err(CliError::config("--parallel must be >= 1"));
        }
        let emitter = cfg.emitter.resolve()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallel)
            .build()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
        Ok(Self { cfg, emitter, fixture, out_dir, seed, pool, written: Vec::new() })
    }

    /// Fixture measurements, or the built-in ones.
    pub fn measurements(&self) -> Measurements {
        self.fixture.as_ref().map_or_else(Measurements::default, |f| f.measurements)
    }

    /// Generator for independent stream `stream` of the run seed.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::io(format!("{}: {e}", self.out_dir.display())))?;
        let path = self.out_dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

/// Reads an input file; a missing or empty file is an I/O error.
pub fn read_input(path: &Path) -> CliResult<String> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Err(CliError::io(format!("{}: input is empty", path.display())));
    }
    Ok(text)
}

pub fn run(cmd: Command, ctx: &mut Ctx) -> CliResult<()> {
    if let Some(w) = &ctx.cfg.analysis.workflow {
        if w != cmd.as_str() {
            return Err(CliError::config(format!("config is for workflow '{w}', not '{}'", cmd.as_str())));
        }
    }
    match cmd {
        Command::Spectrum => spectrum::run(ctx),
        Command::Purcell => purcell::run(ctx),
        Command::Brightness => brightness::run(ctx),
        Command::Lifetime => lifetime::run(ctx),
        Command::Saturation => saturation::run(ctx),
        Command::G2 => g2::run(ctx),
        Command::Budget => budget::run(ctx),
    }
}

/// Least-squares line `y = slope·x + intercept` and its R².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn line_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some(LineFit { slope, intercept: my - slope * mx, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_exact() {
        let f = line_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(line_fit(&[1.0], &[1.0]).is_none());
        assert!(line_fit(&[1.0, 1.0], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn streams_are_independent_and_reproducible() {
        use rand::RngCore;
        let ctx = Ctx::new(RunConfig::default(), None, PathBuf::from("."), 7, 1).unwrap();
        let (a, b) = (ctx.rng(0).next_u64(), ctx.rng(1).next_u64());
        assert_ne!(a, b);
        assert_eq!(a, ctx.rng(0).next_u64());
    }
}

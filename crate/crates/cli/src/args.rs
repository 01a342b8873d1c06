use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cran-rates", version, about = "Rate regions of uplink cloud radio access networks with oblivious relays")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate rate regions of a model file.
    Region(RegionArgs),
    /// Per-cell rates of the circular Wyner model over a power sweep.
    Wyner(WynerArgs),
    /// Rates of the single-user two-relay example over a power sweep.
    Example1(Example1Args),
    /// Check extreme-point domination on random discrete instances.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output file, written atomically. Defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed in hexadecimal.
    #[arg(long, default_value = "5EED", value_parser = parse_hex)]
    pub seed: u64,
    /// Comparison tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated scheme names.
    #[arg(long, value_delimiter = ',', required = true)]
    pub scheme: Vec<String>,
    /// Time-sharing phases of the Gaussian region.
    #[arg(long, default_value_t = 2)]
    pub q_card: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct WynerArgs {
    /// Number of cells.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    pub gamma: f64,
    /// Fronthaul per relay in bits.
    #[arg(long, default_value_t = 3.5, conflicts_with = "dof")]
    pub c: f64,
    /// Tie the fronthaul to the power as C = 5·log10(P).
    #[arg(long)]
    pub dof: bool,
    #[arg(long)]
    pub sweep: Option<SweepSpec>,
    /// Comma-separated scheme names; all by default.
    #[arg(long, value_delimiter = ',')]
    pub scheme: Vec<String>,
    /// Largest number of time-sharing phases.
    #[arg(long, default_value_t = 3)]
    pub q_card: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CsvFormat {
    Wide,
    Long,
}

#[derive(Debug, Args)]
pub struct Example1Args {
    /// Channel gain to both relays.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Comma-separated fronthaul values; one table per value.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 6.0])]
    pub c: Vec<f64>,
    #[arg(long)]
    pub sweep: Option<SweepSpec>,
    #[arg(long, value_enum, default_value_t = CsvFormat::Wide)]
    pub format: CsvFormat,
    /// Largest number of time-sharing phases.
    #[arg(long, default_value_t = 3)]
    pub q_card: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    /// Relays per instance.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Users per instance.
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    #[command(flatten)]
    pub common: Common,
}

fn parse_hex(s: &str) -> Result<u64, String> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u64::from_str_radix(digits, 16).map_err(|e| format!("invalid hexadecimal seed {s:?}: {e}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Db,
}

/// `VAR:LO:HI:STEPS[:dB]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: String,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub scale: Scale,
}

impl FromStr for SweepSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(format!("sweep {s:?} is not VAR:LO:HI:STEPS[:dB]"));
        }
        let num = |p: &str| p.parse::<f64>().map_err(|e| format!("sweep bound {p:?}: {e}"));
        let scale = match parts.get(4) {
            None => Scale::Linear,
            Some(t) if t.eq_ignore_ascii_case("db") => Scale::Db,
            Some(t) => return Err(format!("sweep scale {t:?} is not dB")),
        };
        let spec = SweepSpec {
            variable: parts[0].to_string(),
            lo: num(parts[1])?,
            hi: num(parts[2])?,
            steps: parts[3].parse().map_err(|e| format!("sweep steps {:?}: {e}", parts[3]))?,
            scale,
        };
        if spec.steps < 2 {
            return Err(format!("sweep needs at least 2 steps, got {}", spec.steps));
        }
        if !(spec.lo < spec.hi) {
            return Err(format!("sweep bounds {} and {} are not ordered", spec.lo, spec.hi));
        }
        if spec.scale == Scale::Linear && spec.lo <= 0.0 && spec.variable == "P" {
            return Err("a linear power sweep must start above 0".into());
        }
        Ok(spec)
    }
}

impl SweepSpec {
    /// Grid points in dB of the power variable `P`.
    pub fn power_db(&self) -> Result<Vec<f64>, String> {
        if self.variable != "P" {
            return Err(format!("only the power P can be swept, got {:?}", self.variable));
        }
        let grid = cran_rates::sweep::linear_grid(self.lo, self.hi, self.steps).map_err(|e| e.to_string())?;
        Ok(match self.scale {
            Scale::Db => grid,
            Scale::Linear => grid.into_iter().map(cran_rates::sweep::linear_to_db).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_specs() {
        let s: SweepSpec = "P:-20:20:41:dB".parse().unwrap();
        assert_eq!((s.lo, s.hi, s.steps, s.scale), (-20.0, 20.0, 41, Scale::Db));
        assert_eq!(s.power_db().unwrap()[20], 0.0);
        let s: SweepSpec = "P:1:100:3".parse().unwrap();
        assert!((s.power_db().unwrap()[2] - 20.0).abs() < 1e-12);
        assert!("P:0:1:1".parse::<SweepSpec>().is_err());
        assert!("P:1:0:5".parse::<SweepSpec>().is_err());
        assert!("P:0:1".parse::<SweepSpec>().is_err());
        assert!("P:0:1:5:log".parse::<SweepSpec>().is_err());
        assert!("C:1:2:3".parse::<SweepSpec>().unwrap().power_db().is_err());
    }

    #[test]
    fn hex_seeds() {
        assert_eq!(parse_hex("5EED"), Ok(0x5EED));
        assert_eq!(parse_hex("0x10"), Ok(16));
        assert!(parse_hex("xyz").is_err());
    }
}

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use exciton_trap::classical::absorption_time_estimate;
use exciton_trap::config::parse_block;
use exciton_trap::liouville::{build_liouvillian, diagonalize, write_spectrum};
use exciton_trap::observables::{absorption_horizon, absorption_time, default_time_grid, uniform_grid, DEFAULT_POINTS};
use exciton_trap::scan::{self, classical_comparison, heatmap_speedup, logspace, run_sweep, SweepJob};
use exciton_trap::validate;
use exciton_trap::{
    build_hamiltonian, critical_length, survival, Engine, Error, NetworkKind, NetworkSpec, ObservableSeries, Result,
};

#[derive(Parser)]
#[command(name = "exciton-trap", version, about = "Exciton absorption on stars and chains under pure dephasing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One parameter point; writes the `time,p_absorbed` series.
    Simulate(Params),
    /// tau over a grid of defect energies (default 0:4:0.05).
    SweepDelta(Params),
    /// tau and speedup over a grid of dephasing rates.
    SweepGamma(Params),
    /// Speedup over a grid of N and L at fixed dephasing.
    Heatmap(Params),
    /// Quantum tau next to the classical mean first-passage estimates.
    ClassicalMfpt(Params),
    /// Randomized invariant and cross-engine suites.
    Validate(Params),
}

/// Every value may also come from `--config`; flags win. Lists are written
/// `a,b,c`, `start:stop:step` or `log:lo:hi:n`.
#[derive(Args, Debug, Default)]
struct Params {
    /// Flat `key = value` file using the flag names as keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `star` or `chain`.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long = "L")]
    l: Option<String>,
    #[arg(long = "J")]
    j: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long = "gamma-trap")]
    gamma_trap: Option<String>,
    /// `full`, `reduced`, `classical` or `auto`.
    #[arg(long)]
    engine: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    tmax: Option<String>,
    #[arg(long)]
    points: Option<String>,
    /// Also write the Liouvillian spectrum (`simulate` with the full engine).
    #[arg(long)]
    spectrum: Option<PathBuf>,
    /// Seed for `validate`.
    #[arg(long)]
    seed: Option<String>,
}

struct Values {
    map: BTreeMap<String, String>,
}

const KEYS: [&str; 12] =
    ["kind", "N", "L", "J", "delta", "gamma", "gamma_trap", "engine", "out", "tmax", "points", "seed"];

impl Values {
    fn collect(p: &Params) -> Result<Self> {
        let mut map = BTreeMap::new();
        if let Some(path) = &p.config {
            for (k, v) in parse_block(&std::fs::read_to_string(path)?)? {
                let k = if k == "gamma-trap" { "gamma_trap".to_string() } else { k };
                if !KEYS.contains(&k.as_str()) {
                    return Err(Error::Config(format!("unknown key `{k}` in {}", path.display())));
                }
                map.insert(k, v);
            }
        }
        let flags = [
            ("kind", &p.kind),
            ("N", &p.n),
            ("L", &p.l),
            ("J", &p.j),
            ("delta", &p.delta),
            ("gamma", &p.gamma),
            ("gamma_trap", &p.gamma_trap),
            ("engine", &p.engine),
            ("tmax", &p.tmax),
            ("points", &p.points),
            ("seed", &p.seed),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        if let Some(out) = &p.out {
            map.insert("out".into(), out.display().to_string());
        }
        Ok(Values { map })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.trim().parse().map_err(|_| Error::Config(format!("bad value for {key}: `{v}`"))),
        }
    }

    fn list(&self, key: &str, default: &str) -> Result<Vec<f64>> {
        parse_list(self.raw(key).unwrap_or(default)).map_err(|e| Error::Config(format!("{key}: {e}")))
    }

    fn usize_list(&self, key: &str, default: &str) -> Result<Vec<usize>> {
        self.list(key, default)?
            .into_iter()
            .map(|v| {
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(Error::Config(format!("{key}: `{v}` is not a non-negative integer")))
                }
            })
            .collect()
    }

    fn engine(&self) -> Result<Engine> {
        self.raw("engine").unwrap_or("auto").parse()
    }

    /// Spec with every scalar key except the swept ones.
    fn spec(&self, n: usize, l: usize, delta: f64) -> Result<NetworkSpec> {
        let kind: NetworkKind = self.raw("kind").unwrap_or("star").parse()?;
        let spec = NetworkSpec::new(kind, n, l)
            .with_hopping(self.get("J", 1.0)?)
            .with_defect(delta)
            .with_trap_rate(self.get("gamma_trap", NetworkSpec::DEFAULT_TRAP_RATE)?);
        spec.validate()?;
        Ok(spec)
    }

    fn point_spec(&self) -> Result<NetworkSpec> {
        let n = self.get("N", 5usize)?;
        let delta = match self.raw("delta") {
            Some("opt") => ((n as f64) - 1.0).sqrt() * self.get("J", 1.0)?,
            _ => self.get("delta", 0.0)?,
        };
        self.spec(n, self.get("L", 5usize)?, delta)
    }

    fn output(&self) -> Result<Box<dyn Write>> {
        Ok(match self.raw("out") {
            None | Some("-") => Box::new(BufWriter::new(io::stdout().lock())),
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        })
    }
}

fn parse_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        ["log", lo, hi, n] => {
            let n: usize = n.trim().parse().map_err(|_| format!("`{n}` is not a count"))?;
            Ok(logspace(num(lo)?, num(hi)?, n))
        }
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(format!("empty range `{text}`"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        [_] => text.split(',').map(num).collect(),
        _ => Err(format!("cannot parse `{text}`")),
    }
}

fn simulate(v: &Values, spectrum: Option<&PathBuf>) -> Result<()> {
    let spec = v.point_spec()?;
    let gamma = v.get("gamma", 0.0)?;
    let engine = v.engine()?;
    let points = v.get("points", DEFAULT_POINTS)?;
    let times = match v.raw("tmax") {
        Some(_) => uniform_grid(v.get("tmax", 0.0)?, points),
        None => default_time_grid(&spec, points),
    };
    let resolved = engine.resolve(&spec)?;
    let curve = survival(&spec, gamma, resolved)?;
    let series =
        ObservableSeries::from_survival(spec, gamma, resolved.provenance(), &times, &curve.survival_many(&times))?;
    series.write_csv(v.output()?)?;
    match absorption_time(curve.as_ref(), absorption_horizon(&spec)) {
        Ok(r) => eprintln!("tau = {:.8} (converged: {})", r.tau, r.converged),
        Err(e) => eprintln!("tau unavailable: {e}"),
    }
    if let Some(path) = spectrum {
        let l = build_liouvillian(&build_hamiltonian(&spec)?, gamma)?;
        write_spectrum(&diagonalize(&l)?, BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

fn sweep(v: &Values, deltas: Vec<f64>, gammas: Vec<f64>, with_speedup: bool) -> Result<()> {
    let job = SweepJob {
        base: v.point_spec()?,
        deltas,
        gammas,
        engine: v.engine()?,
        with_speedup,
    };
    let rows = run_sweep(&job)?;
    let failed = rows.iter().filter(|r| !r.converged).count();
    scan::write_rows(&rows, v.output()?)?;
    if failed > 0 {
        eprintln!("{failed} of {} points did not converge", rows.len());
    }
    Ok(())
}

fn heatmap(v: &Values) -> Result<()> {
    let branches = v.usize_list("N", "3:8:1")?;
    let lengths = v.usize_list("L", "2:12:1")?;
    let template = v.spec(branches.first().copied().unwrap_or(3), lengths.first().copied().unwrap_or(2), 0.0)?;
    let rows = heatmap_speedup(&template, &branches, &lengths, v.get("gamma", 0.0)?, v.engine()?)?;
    scan::write_rows(&rows, v.output()?)?;
    for n in branches.iter().filter(|&&n| n > 1) {
        eprintln!("N = {n}: L* = {:.3}", critical_length(*n)?);
    }
    Ok(())
}

fn classical(v: &Values) -> Result<()> {
    let spec = v.point_spec()?;
    let gammas = v.list("gamma", "log:0.01:100:41")?;
    let rows = classical_comparison(&spec, &gammas, v.engine()?)?;
    scan::write_classical(&rows, v.output()?)?;
    if spec.trap_rate > 0.0 {
        eprintln!("plateau ln2 N_S/Gamma = {:.4}", absorption_time_estimate(spec.total_sites() as f64 / spec.trap_rate));
    }
    Ok(())
}

fn run_validate(v: &Values) -> Result<bool> {
    let reports = validate::run_all(v.get("seed", 1u64)?)?;
    let mut out = v.output()?;
    for r in &reports {
        writeln!(out, "{r}")?;
        for msg in r.violations.iter().take(5) {
            writeln!(out, "  {msg}")?;
        }
    }
    out.flush()?;
    Ok(reports.iter().all(|r| r.passed()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(p) => simulate(&Values::collect(&p)?, p.spectrum.as_ref()).map(|_| true),
        Command::SweepDelta(p) => {
            let mut v = Values::collect(&p)?;
            let deltas = parse_list(v.map.remove("delta").as_deref().unwrap_or("0:4:0.05")).map_err(Error::Config)?;
            sweep(&v, deltas, v.list("gamma", "0")?, false).map(|_| true)
        }
        Command::SweepGamma(p) => {
            let mut v = Values::collect(&p)?;
            let deltas = match v.map.remove("delta").as_deref() {
                Some("opt") | None => vec![v.point_spec()?.optimal_defect()],
                Some(d) => parse_list(d).map_err(Error::Config)?,
            };
            sweep(&v, deltas, v.list("gamma", "log:0.001:10:41")?, true).map(|_| true)
        }
        Command::Heatmap(p) => heatmap(&Values::collect(&p)?).map(|_| true),
        Command::ClassicalMfpt(p) => classical(&Values::collect(&p)?).map(|_| true),
        Command::Validate(p) => run_validate(&Values::collect(&p)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_forms() {
        assert_eq!(parse_list("0,0.5,2").unwrap(), vec![0.0, 0.5, 2.0]);
        assert_eq!(parse_list("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_list("0:4:0.05").unwrap().len(), 81);
        assert_eq!(parse_list("log:1:100:3").unwrap().len(), 3);
        assert!(parse_list("1:0:0.1").is_err());
        assert!(parse_list("a").is_err());
    }

    #[test]
    fn flags_override_config() {
        let dir = std::env::temp_dir().join(format!("exciton-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let cfg = dir.join("run.cfg");
        std::fs::write(&cfg, "kind = chain\nN = 4\nL = 3\ngamma-trap = 0.2\n").unwrap();
        let p = Params { config: Some(cfg), l: Some("6".into()), ..Params::default() };
        let v = Values::collect(&p).unwrap();
        let spec = v.point_spec().unwrap();
        assert_eq!((spec.kind, spec.branches, spec.length), (NetworkKind::AsymmetricChain, 4, 6));
        assert_eq!(spec.trap_rate, 0.2);
        std::fs::write(dir.join("bad.cfg"), "colour = red\n").unwrap();
        let p = Params { config: Some(dir.join("bad.cfg")), ..Params::default() };
        assert!(Values::collect(&p).is_err());
    }
}

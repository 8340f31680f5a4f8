//! `photonkd` subcommands.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use photonkd_core::mub::{build_basis_table, verify_unbiasedness, BasisId, MubCircuits, TABLE_TOL};
use photonkd_core::mzem::{effective_visibility, ModeProfile, MzemSettings, Port, DEFAULT_EXTENT, DEFAULT_GRID};
use photonkd_core::postproc::{privacy_amplify, reconcile};
use photonkd_core::protocol::{Eavesdropper, Simulator};
use photonkd_core::{Complex, RandomStream};

use crate::config::{parse_bases, RunConfigFile};
use crate::error::{CliError, ExitKind, WithExit};
use crate::report::{rate, records_csv, StatsDocument};
use crate::{keyfile, runner};

#[derive(Debug, Parser)]
#[command(name = "photonkd", version, about = "Four-dimensional BB84 with polarization and transverse-mode qubits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the five bases and check that they are mutually unbiased.
    Mubs(MubsArgs),
    /// Run the key-distribution protocol from a JSON config.
    Simulate(SimulateArgs),
    /// Interferometer visibility scans and per-state routing.
    Mzem(MzemArgs),
    /// Reconcile and hash a pair of sifted keys.
    Distill(DistillArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Args)]
pub struct MubsArgs {
    /// Exit with status 1 unless every check passes.
    #[arg(long)]
    pub verify: bool,
    /// Print only this basis.
    #[arg(long)]
    pub basis: Option<BasisId>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QberKind {
    Symbol,
    Bit,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Run configuration (JSON).
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub rounds: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Comma-separated basis names, e.g. `B1,B2,B5`.
    #[arg(long, value_delimiter = ',')]
    pub bases: Option<Vec<String>>,
    /// Stats document path; printed to stdout when absent.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Per-round CSV path.
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[arg(long)]
    pub alice_key: Option<PathBuf>,
    #[arg(long)]
    pub bob_key: Option<PathBuf>,
    /// Exit with status 1 if the measured QBER is farther than `--tol` from this.
    #[arg(long)]
    pub expect_qber: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = QberKind::Symbol)]
    pub qber_kind: QberKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Tem00,
    Tem01,
    Tem10,
}

impl Mode {
    /// Node counts along x and y.
    fn orders(self) -> (u32, u32) {
        match self {
            Mode::Tem00 => (0, 0),
            Mode::Tem01 => (0, 1),
            Mode::Tem10 => (1, 0),
        }
    }
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("task").required(true).args(["scan_dx", "preset"]))]
pub struct MzemArgs {
    /// Displacements in waist units: first, last and number of points.
    #[arg(long, num_args = 3, value_names = ["FROM", "TO", "STEPS"], allow_negative_numbers = true)]
    pub scan_dx: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = Mode::Tem00)]
    pub mode: Mode,
    /// Samples per side of the transverse grid.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    /// Grid half-width in waists; defaults to max(6, 4 + 2·max|dx|).
    #[arg(long)]
    pub extent: Option<f64>,
    /// Print the per-state routing for a named visibility preset.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct DistillArgs {
    #[arg(long)]
    pub alice: PathBuf,
    #[arg(long)]
    pub bob: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub block_size: usize,
    #[arg(long, default_value_t = 4)]
    pub passes: usize,
    /// Extra bits removed on top of the leaked parities.
    #[arg(long, default_value_t = 0)]
    pub margin: usize,
    /// Seeds both the reconciliation shuffles and the hash.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write Bob's distilled key here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("photonkd: {e}");
            e.kind.code()
        }
    }
}

pub fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Mubs(a) => mubs(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Mzem(a) => mzem(&a),
        Command::Distill(a) => distill(&a),
    }
}

fn complex_text(c: Complex) -> String {
    let sign = if c.im < 0.0 { '-' } else { '+' };
    format!("{:+.6}{sign}{:.6}i", c.re + 0.0, c.im.abs())
}

fn mubs(a: &MubsArgs) -> Result<(), CliError> {
    let table = build_basis_table().or_exit(ExitKind::Verification)?;
    let report = verify_unbiasedness(&table);
    let shown: Vec<BasisId> = a.basis.map_or(BasisId::ALL.to_vec(), |b| vec![b]);

    let mut out = String::new();
    match a.format {
        Format::Csv => {
            out.push_str("basis,label,re0,im0,re1,im1,re2,im2,re3,im3\n");
            for &b in &shown {
                for l in 0..4 {
                    let amps = table.state(b, l).amplitudes();
                    let cols: Vec<String> =
                        amps.iter().flat_map(|c| [c.re + 0.0, c.im + 0.0]).map(|x| format!("{x:.12}")).collect();
                    out.push_str(&format!("{b},{l},{}\n", cols.join(",")));
                }
            }
        }
        Format::Text => {
            out.push_str("amplitudes on |H,TEM-H>, |H,TEM-V>, |V,TEM-H>, |V,TEM-V>\n");
            for &b in &shown {
                let csco: Vec<String> = b.csco_letters().iter().map(|(p, t)| format!("{p}{t}")).collect();
                out.push_str(&format!("\n{b}  CSCO {}\n", csco.join(" ")));
                for l in 0..4 {
                    let amps: Vec<String> = table.state(b, l).amplitudes().iter().map(|&c| complex_text(c)).collect();
                    let eig: Vec<String> = table.eigenvalues(b, l).iter().map(|e| format!("{:+}", e.round())).collect();
                    out.push_str(&format!("  {l}  [{}]  eigenvalues {}\n", amps.join(", "), eig.join(" ")));
                }
            }
            out.push_str(&format!(
                "\nunbiasedness: {} cross-basis pairs, max | |<a|b>|^2 - 1/4 | = {:.3e} ({}/{} vs {}/{})\n",
                report.pairs_checked,
                report.max_deviation,
                report.worst.0.basis,
                report.worst.0.label,
                report.worst.1.basis,
                report.worst.1.label,
            ));
        }
    }
    print!("{out}");

    if a.verify {
        MubCircuits::build().or_exit(ExitKind::Verification)?;
        if !report.passes(TABLE_TOL) {
            return Err(CliError::verification(anyhow!(
                "bases are not mutually unbiased: deviation {:e} exceeds {TABLE_TOL:e}",
                report.max_deviation
            )));
        }
        eprintln!("verified: bases orthonormal, CSCOs commute, cross pairs unbiased, preparation circuits exact");
    }
    Ok(())
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display())).or_exit(ExitKind::Data)
}

fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let mut file = RunConfigFile::load(&a.config).or_exit(ExitKind::Config)?;
    if let Some(s) = a.seed {
        file.seed = s;
    }
    if let Some(r) = a.rounds {
        file.rounds = r;
    }
    if let Some(w) = a.workers {
        file.workers = Some(w);
    }
    if let Some(b) = &a.bases {
        parse_bases(b).or_exit(ExitKind::Config)?;
        file.bases = b.clone();
    }
    let out = &mut file.output;
    for (flag, slot) in [
        (&a.stats, &mut out.stats),
        (&a.records, &mut out.records),
        (&a.alice_key, &mut out.alice_key),
        (&a.bob_key, &mut out.bob_key),
    ] {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    }
    let plan = file.resolve().map_err(|e| CliError::config(e.context(format!("invalid config {}", a.config.display()))))?;

    let sim = Simulator::new(plan.protocol.clone()).or_exit(ExitKind::Config)?;
    let outcome = runner::run(&sim, plan.workers).or_exit(ExitKind::Data)?;
    let doc = StatsDocument::new(&plan.protocol, &outcome.stats);

    match &plan.output.stats {
        Some(p) => write(p, &doc.to_json())?,
        None => print!("{}", doc.to_json()),
    }
    if let Some(p) = &plan.output.records {
        write(p, &records_csv(&outcome.records))?;
    }
    let s = &outcome.stats;
    let eve = match &plan.protocol.eve {
        Eavesdropper::None => "none".to_string(),
        Eavesdropper::InterceptResend(b) => b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
    };
    eprintln!(
        "rounds {}  sifted {}  eve {eve}  symbol QBER {}  bit QBER {}  sifted fraction {}",
        s.n_rounds,
        s.n_sifted,
        rate(s.symbol_error_rate),
        rate(s.bit_error_rate),
        rate(s.sifted_fraction)
    );

    if s.aborted {
        return Err(CliError::verification(anyhow!(
            "aborted: bit QBER {} exceeds threshold {}; key files not written",
            rate(s.bit_error_rate),
            rate(plan.protocol.qber_abort_threshold.unwrap_or_default())
        )));
    }
    if let Some(p) = &plan.output.alice_key {
        write(p, &keyfile::encode_raw(&outcome.alice_bits))?;
    }
    if let Some(p) = &plan.output.bob_key {
        write(p, &keyfile::encode_raw(&outcome.bob_bits))?;
    }
    if let Some(want) = a.expect_qber {
        let got = match a.qber_kind {
            QberKind::Symbol => s.symbol_error_rate,
            QberKind::Bit => s.bit_error_rate,
        };
        if (got - want).abs() > a.tol {
            return Err(CliError::verification(anyhow!(
                "QBER {} differs from expected {} by more than {}",
                rate(got),
                rate(want),
                a.tol
            )));
        }
    }
    Ok(())
}

fn scan_points(v: &[f64]) -> anyhow::Result<Vec<f64>> {
    let [from, to, steps] = v else { bail!("--scan-dx takes FROM TO STEPS") };
    if !(from.is_finite() && to.is_finite()) {
        bail!("scan bounds must be finite");
    }
    if *steps < 1.0 || steps.fract() != 0.0 {
        bail!("STEPS must be a positive integer, got {steps}");
    }
    let n = *steps as usize;
    if n == 1 {
        return Ok(vec![*from]);
    }
    Ok((0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect())
}

fn mzem(a: &MzemArgs) -> Result<(), CliError> {
    let mut out = String::new();
    if let Some(v) = &a.scan_dx {
        let points = scan_points(v).or_exit(ExitKind::Config)?;
        let reach = points.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let extent = a.extent.unwrap_or(DEFAULT_EXTENT.max(4.0 + 2.0 * reach));
        let (mx, my) = a.mode.orders();
        let profile = ModeProfile::hermite_gauss(mx, my, a.grid, extent).or_exit(ExitKind::Config)?;
        out.push_str("dx,visibility\n");
        for dx in points {
            let v = effective_visibility(&profile, dx).or_exit(ExitKind::Config)?;
            out.push_str(&format!("{dx},{}\n", rate(v)));
        }
    }
    if let Some(name) = &a.preset {
        let s = MzemSettings::preset(name).or_exit(ExitKind::Config)?;
        if a.scan_dx.is_some() {
            out.push('\n');
        }
        out.push_str("state,visibility_a,visibility_b,p_port_a,p_port_b,p_wrong_port\n");
        for (k, label) in ["HH", "HV", "VH", "VV"].iter().enumerate() {
            let (va, vb) = s.visibility.for_state(k);
            let pa = s.port_a_probability(k);
            let wrong = if s.nominal_detector(k).port == Port::A { 1.0 - pa } else { pa };
            out.push_str(&format!("{label},{va:.2},{vb:.2},{},{},{}\n", rate(pa), rate(1.0 - pa), rate(wrong)));
        }
    }
    print!("{out}");
    Ok(())
}

fn distill(a: &DistillArgs) -> Result<(), CliError> {
    let alice = keyfile::read(&a.alice).or_exit(ExitKind::Data)?;
    let bob = keyfile::read(&a.bob).or_exit(ExitKind::Data)?;
    if alice.len() != bob.len() {
        return Err(CliError::data(anyhow!("key lengths differ: alice {} bits, bob {} bits", alice.len(), bob.len())));
    }
    let mut rng = RandomStream::new(a.seed);
    let rep = reconcile(&alice, &bob, a.block_size, a.passes, &mut rng).or_exit(ExitKind::Config)?;
    let final_bob = privacy_amplify(&rep.corrected, rep.parity_bits_leaked, a.seed, a.margin).or_exit(ExitKind::Data)?;
    let final_alice = privacy_amplify(&alice, rep.parity_bits_leaked, a.seed, a.margin).or_exit(ExitKind::Data)?;

    println!("input_bits {}", alice.len());
    println!("initial_error_rate {}", rate(alice.hamming(&bob) as f64 / alice.len() as f64));
    println!("block_size {}", a.block_size);
    println!("passes {}", rep.passes);
    println!("parities_leaked {}", rep.parity_bits_leaked);
    println!("residual_error {}", rate(rep.residual_error_estimate));
    println!("security_margin {}", a.margin);
    println!("final_bits {}", final_bob.len());
    println!("keys_agree {}", final_alice == final_bob);
    if let Some(p) = &a.out {
        write(p, &keyfile::encode(&final_bob))?;
    }
    Ok(())
}

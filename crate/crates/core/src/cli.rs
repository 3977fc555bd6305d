//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a checked property failed, 2 invalid input, 3 an
//! optimizer or factorization did not converge.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::capacity::{
    constrained_holevo, eb_equality_diagnostic, energy_constrained_capacities, holevo_capacity, min_output_entropy,
    Argmax, CapacityOptions, CapacityResult, EbReport, EnergyConstraint,
};
use crate::channels::{
    complementary_of_kraus, dephasing, kraus_ranks, minimal_kraus, named_channel, partial_trace_channel, trine,
    trine_vectors, Ensemble, KrausChannel,
};
use crate::entropy::{
    cond_entropy, coherent_info, holevo, holevo_image, mutual_info, mutual_info_relative, vn_entropy, EntropyValue,
};
use crate::error::Error;
use crate::io::{self, channel_doc, ensemble_doc, matrix_doc, ChannelDoc, MatrixDoc, MemberDoc, RENORMALIZE_TOL};
use crate::matcore::{re, CVector, DensityMatrix, PureStateVector};
use crate::petz::{peb_upper_certificate, rank_bounded_complement, reversibility_audit, RecoveryReport, GAP_TOL, RANK_TOL, REVERSIBLE_TOL};
use crate::random;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

/// Channel arguments with this prefix name a built-in channel instead of a file.
pub const BUILTIN_PREFIX: &str = "builtin:";

#[derive(Parser, Debug)]
#[command(name = "qchan", version, about = "Reversibility, complementary channels and Holevo-type capacities")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    #[arg(long, env = "QCHAN_SEED", default_value_t = 0, global = true)]
    pub seed: u64,
    /// Kraus files within this completeness deviation are renormalized, beyond it rejected.
    #[arg(long, default_value_t = RENORMALIZE_TOL, global = true)]
    pub completeness_tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dimensions, minimal Kraus form and PEB certificates.
    Info {
        /// Channel file, or builtin:NAME (identity:D, dephasing:D, partial-trace:B:E, trine, depolarizing:D:P)
        channel: String,
        #[arg(long, default_value_t = RANK_TOL)]
        rank_tol: f64,
    },
    /// Petz-recovery reversibility audit of a channel on an ensemble.
    Audit {
        channel: String,
        ensemble: PathBuf,
        #[arg(long, default_value_t = GAP_TOL)]
        gap_tol: f64,
        #[arg(long, default_value_t = REVERSIBLE_TOL)]
        residual_tol: f64,
    },
    /// Rank-bounded Kraus form of the complementary channel.
    Construct {
        channel: String,
        ensemble: PathBuf,
        #[arg(long, short)]
        rank: usize,
        /// Also write the emitted channel to this file.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Holevo capacity, or its state- and energy-constrained versions.
    Capacity {
        channel: String,
        #[arg(long, conflicts_with = "hamiltonian")]
        state: Option<PathBuf>,
        #[arg(long, requires = "bound")]
        hamiltonian: Option<PathBuf>,
        #[arg(long, requires = "hamiltonian")]
        bound: Option<f64>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Mutual, coherent and related entropic quantities at an input state.
    Mutinfo { channel: String, state: PathBuf },
    /// Scripted scenarios that check a known inequality or equality.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    #[arg(long, default_value_t = CapacityOptions::default().tol)]
    pub tol: f64,
    #[arg(long, default_value_t = CapacityOptions::default().max_iter)]
    pub max_iter: usize,
    #[arg(long, default_value_t = CapacityOptions::default().restarts)]
    pub restarts: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DemoName {
    Trine,
    BellPartialTrace,
    DephasingEquality,
    StrictConcavity,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::EigenNoConvergence { .. } | Error::SvdFailure { .. } => EXIT_NONCONVERGENCE,
        Error::AuditFailed(_) | Error::ConstructionInvalid { .. } => EXIT_ASSERTION,
        _ => EXIT_INVALID,
    }
}

fn positive(name: &str, x: f64) -> crate::Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            reason: format!("{name} must be positive, got {x}"),
        })
    }
}

pub fn load_channel(arg: &str, tol: f64) -> crate::Result<KrausChannel> {
    match arg.strip_prefix(BUILTIN_PREFIX) {
        Some(spec) => named_channel(spec),
        None => io::read_channel(Path::new(arg), tol),
    }
}

impl SearchArgs {
    fn options(&self, seed: u64) -> crate::Result<CapacityOptions> {
        positive("--tol", self.tol)?;
        if self.restarts == 0 || self.max_iter == 0 {
            return Err(Error::InvalidParameter {
                reason: "--restarts and --max-iter must be at least 1".into(),
            });
        }
        Ok(CapacityOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            restarts: self.restarts,
            seed,
            ensemble_cap: None,
        })
    }
}

/// Parses arguments, runs, prints, and returns the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            let _ = out.write_all(outcome.output.as_bytes());
            for w in &outcome.failures {
                let _ = writeln!(err, "check failed: {w}");
            }
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub struct Outcome {
    pub output: String,
    pub code: i32,
    pub failures: Vec<String>,
}

struct Emit {
    format: Format,
    text: String,
    failures: Vec<String>,
    nonconverged: bool,
}

impl Emit {
    fn new(format: Format) -> Self {
        Self {
            format,
            text: String::new(),
            failures: Vec::new(),
            nonconverged: false,
        }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        if self.format == Format::Text {
            self.text.push_str(s.as_ref());
            self.text.push('\n');
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn finish(mut self, report: &impl Serialize) -> Outcome {
        if self.format == Format::Json {
            self.text = io::to_json(report);
            self.text.push('\n');
        }
        let code = if !self.failures.is_empty() {
            EXIT_ASSERTION
        } else if self.nonconverged {
            EXIT_NONCONVERGENCE
        } else {
            EXIT_OK
        };
        Outcome {
            output: self.text,
            code,
            failures: self.failures,
        }
    }
}

pub fn run(cli: &Cli) -> crate::Result<Outcome> {
    positive("--completeness-tol", cli.completeness_tol)?;
    let emit = Emit::new(cli.format);
    match &cli.command {
        Command::Info { channel, rank_tol } => {
            positive("--rank-tol", *rank_tol)?;
            cmd_info(emit, &load_channel(channel, cli.completeness_tol)?, *rank_tol)
        }
        Command::Audit {
            channel,
            ensemble,
            gap_tol,
            residual_tol,
        } => {
            positive("--gap-tol", *gap_tol)?;
            positive("--residual-tol", *residual_tol)?;
            let chan = load_channel(channel, cli.completeness_tol)?;
            cmd_audit(emit, &chan, &io::read_ensemble(ensemble)?, *gap_tol, *residual_tol)
        }
        Command::Construct {
            channel,
            ensemble,
            rank,
            output,
        } => {
            let chan = load_channel(channel, cli.completeness_tol)?;
            cmd_construct(emit, &chan, &io::read_ensemble(ensemble)?, *rank, output.as_deref())
        }
        Command::Capacity {
            channel,
            state,
            hamiltonian,
            bound,
            search,
        } => {
            let chan = load_channel(channel, cli.completeness_tol)?;
            let opts = search.options(cli.seed)?;
            match (state, hamiltonian, bound) {
                (Some(s), _, _) => cmd_capacity_state(emit, &chan, &io::read_state(s)?, &opts),
                (None, Some(h), Some(b)) => {
                    let constraint = EnergyConstraint::new(io::read_hamiltonian(h)?, *b)?;
                    cmd_capacity_energy(emit, &chan, &constraint, &opts)
                }
                _ => cmd_capacity(emit, &chan, &opts),
            }
        }
        Command::Mutinfo { channel, state } => {
            let chan = load_channel(channel, cli.completeness_tol)?;
            cmd_mutinfo(emit, &chan, &io::read_state(state)?)
        }
        Command::Demo { name, search } => {
            let opts = search.options(cli.seed)?;
            match name {
                DemoName::Trine => demo_trine(emit),
                DemoName::BellPartialTrace => demo_bell(emit, cli.seed),
                DemoName::DephasingEquality => demo_dephasing(emit, &opts),
                DemoName::StrictConcavity => demo_concavity(emit, cli.seed),
            }
        }
    }
}

fn fmt_list<T: std::fmt::Display>(xs: &[T]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(","))
}

#[derive(Serialize)]
struct PebEntry {
    r: usize,
    certified: bool,
}

#[derive(Serialize)]
struct InfoReport {
    dim_in: usize,
    dim_out: usize,
    kraus_count: usize,
    completeness_deviation: f64,
    minimal_kraus_count: usize,
    ranks: Vec<usize>,
    peb_certificates: Vec<PebEntry>,
}

fn cmd_info(mut emit: Emit, chan: &KrausChannel, rank_tol: f64) -> crate::Result<Outcome> {
    let ops = minimal_kraus(chan)?;
    let ranks = kraus_ranks(&ops, rank_tol)?;
    let peb = (1..=chan.dim_in().min(chan.dim_out()))
        .map(|r| Ok(PebEntry {
            r,
            certified: peb_upper_certificate(chan, r)?,
        }))
        .collect::<crate::Result<Vec<_>>>()?;
    emit.line(format!("dim_in {}, dim_out {}", chan.dim_in(), chan.dim_out()));
    let noun = if ops.len() == 1 { "op" } else { "ops" };
    emit.line(format!(
        "{} minimal Kraus {noun}, ranks {}, 1-PEB certificate: {}",
        ops.len(),
        fmt_list(&ranks),
        peb[0].certified
    ));
    for e in &peb[1..] {
        emit.line(format!("{}-PEB certificate: {}", e.r, e.certified));
    }
    let report = InfoReport {
        dim_in: chan.dim_in(),
        dim_out: chan.dim_out(),
        kraus_count: chan.kraus_ops().len(),
        completeness_deviation: chan.completeness_deviation(),
        minimal_kraus_count: ops.len(),
        ranks,
        peb_certificates: peb,
    };
    Ok(emit.finish(&report))
}

#[derive(Serialize)]
struct AuditReport<'a> {
    #[serde(flatten)]
    audit: &'a RecoveryReport,
    max_residual: f64,
    gap_tol: f64,
    residual_tol: f64,
    /// Verdict under the requested tolerances.
    reversible_at_tolerance: bool,
}

fn cmd_audit(mut emit: Emit, chan: &KrausChannel, ens: &Ensemble, gap_tol: f64, residual_tol: f64) -> crate::Result<Outcome> {
    let audit = reversibility_audit(chan, ens)?;
    let verdict = audit.gap <= gap_tol && audit.max_residual() <= residual_tol;
    emit.line(format!("chi_in  {}", audit.chi_in));
    emit.line(format!("chi_out {}", audit.chi_out));
    emit.line(format!("gap {:.6e}", audit.gap));
    emit.line(format!("max residual {:.6e}", audit.max_residual()));
    if let Some(d) = audit.support_dim {
        emit.line(format!("restricted to support of dimension {d}"));
    }
    for w in &audit.warnings {
        emit.line(format!("warning: {w}"));
    }
    emit.line(format!("reversible: {verdict}"));
    let report = AuditReport {
        audit: &audit,
        max_residual: audit.max_residual(),
        gap_tol,
        residual_tol,
        reversible_at_tolerance: verdict,
    };
    Ok(emit.finish(&report))
}

#[derive(Serialize)]
struct ConstructReport {
    rank_bound: usize,
    per_op_numerical_rank: Vec<usize>,
    certified_rank_bound: usize,
    precondition_residual: f64,
    support_dim: Option<usize>,
    channel: ChannelDoc,
}

fn cmd_construct(mut emit: Emit, chan: &KrausChannel, ens: &Ensemble, r: usize, output: Option<&Path>) -> crate::Result<Outcome> {
    let rb = rank_bounded_complement(chan, ens, r)?;
    if let Some(path) = output {
        std::fs::write(path, io::channel_to_json(&rb.channel) + "\n")?;
    }
    emit.line(format!(
        "{} Kraus ops for the complementary channel, ranks {}, bound {}",
        rb.channel.kraus_ops().len(),
        fmt_list(&rb.per_op_numerical_rank),
        rb.certified_rank_bound
    ));
    emit.line(format!("precondition residual {:.3e}", rb.precondition_residual));
    if output.is_none() {
        emit.line(io::channel_to_json(&rb.channel));
    }
    emit.check(rb.certified_rank_bound <= r, format!("rank bound {} exceeds {r}", rb.certified_rank_bound));
    let report = ConstructReport {
        rank_bound: r,
        per_op_numerical_rank: rb.per_op_numerical_rank.clone(),
        certified_rank_bound: rb.certified_rank_bound,
        precondition_residual: rb.precondition_residual,
        support_dim: rb.support_dim,
        channel: channel_doc(&rb.channel),
    };
    Ok(emit.finish(&report))
}

#[derive(Serialize)]
#[serde(rename_all = "lowercase")]
enum ArgmaxDoc {
    Ensemble(Vec<MemberDoc>),
    State(MatrixDoc),
}

#[derive(Serialize)]
struct CapacityDoc {
    value: EntropyValue,
    converged: bool,
    iterations: usize,
    restarts: usize,
    certificate_gap: f64,
    history: Vec<f64>,
    restart_values: Vec<f64>,
    argmax: ArgmaxDoc,
}

impl From<&CapacityResult> for CapacityDoc {
    fn from(r: &CapacityResult) -> Self {
        Self {
            value: r.value,
            converged: r.converged,
            iterations: r.iterations,
            restarts: r.restarts,
            certificate_gap: r.certificate_gap,
            history: r.history.clone(),
            restart_values: r.restart_values.clone(),
            argmax: match &r.argmax {
                Argmax::Ensemble(e) => ArgmaxDoc::Ensemble(ensemble_doc(e)),
                Argmax::State(s) => ArgmaxDoc::State(matrix_doc(s.matrix())),
            },
        }
    }
}

fn capacity_lines(emit: &mut Emit, label: &str, r: &CapacityResult) {
    emit.line(format!(
        "{label} {:.10} bits ({} restarts, {} iterations, converged: {})",
        r.bits(),
        r.restarts,
        r.iterations,
        r.converged
    ));
    if !r.converged {
        emit.nonconverged = true;
    }
}

#[derive(Serialize)]
struct UnconstrainedReport {
    holevo_capacity: CapacityDoc,
    min_output_entropy: CapacityDoc,
}

fn cmd_capacity(mut emit: Emit, chan: &KrausChannel, opts: &CapacityOptions) -> crate::Result<Outcome> {
    let cbar = holevo_capacity(chan, opts)?;
    let hmin = min_output_entropy(chan, opts)?;
    capacity_lines(&mut emit, "C_bar", &cbar);
    capacity_lines(&mut emit, "H_min", &hmin);
    if let Some(e) = cbar.ensemble() {
        emit.line(format!("optimal ensemble: {} states, weights {}", e.len(), fmt_weights(e)));
    }
    let report = UnconstrainedReport {
        holevo_capacity: (&cbar).into(),
        min_output_entropy: (&hmin).into(),
    };
    Ok(emit.finish(&report))
}

fn fmt_weights(e: &Ensemble) -> String {
    let w: Vec<String> = e.probabilities().map(|p| format!("{p:.6}")).collect();
    format!("[{}]", w.join(", "))
}

#[derive(Serialize)]
struct StateCapacityReport {
    constrained_holevo: CapacityDoc,
    mutual_info: EntropyValue,
    equality_diagnostic: EbDoc,
}

#[derive(Serialize)]
struct EbDoc {
    #[serde(flatten)]
    report: EbReport,
    rank_one_kraus: Option<Vec<MatrixDoc>>,
}

impl From<EbReport> for EbDoc {
    fn from(report: EbReport) -> Self {
        let rank_one_kraus = report.rank_one_kraus.as_ref().map(|ops| ops.iter().map(matrix_doc).collect());
        Self { report, rank_one_kraus }
    }
}

fn eb_lines(emit: &mut Emit, eb: &EbReport) {
    emit.line(format!("I - C_bar {:.6e} (equality: {})", eb.gap, eb.equality));
    if let Some(ranks) = &eb.kraus_ranks {
        emit.line(format!(
            "entanglement-breaking Kraus form on supp rho: ranks {}, Choi distance {:.3e}",
            fmt_list(ranks),
            eb.reconstruction_distance.unwrap_or(f64::NAN)
        ));
    }
    if let Some(e) = &eb.construction_error {
        emit.line(format!("construction: {e}"));
    }
}

fn cmd_capacity_state(mut emit: Emit, chan: &KrausChannel, rho: &DensityMatrix, opts: &CapacityOptions) -> crate::Result<Outcome> {
    let cbar = constrained_holevo(chan, rho, opts)?;
    let info = mutual_info(chan, rho)?;
    let eb = eb_equality_diagnostic(chan, rho, opts)?;
    capacity_lines(&mut emit, "C_bar(rho)", &cbar);
    emit.line(format!("I(rho) {:.10} bits", info.value()));
    eb_lines(&mut emit, &eb);
    let report = StateCapacityReport {
        constrained_holevo: (&cbar).into(),
        mutual_info: info,
        equality_diagnostic: eb.into(),
    };
    Ok(emit.finish(&report))
}

#[derive(Serialize)]
struct EnergyReport {
    bound: f64,
    holevo: CapacityDoc,
    entanglement_assisted: CapacityDoc,
    holevo_energy: f64,
    ea_energy: f64,
    holevo_multiplier: f64,
    ea_multiplier: f64,
    ground_space_dim: Option<usize>,
    equality_diagnostic: Option<EbDoc>,
    notes: Vec<String>,
}

fn cmd_capacity_energy(mut emit: Emit, chan: &KrausChannel, constraint: &EnergyConstraint, opts: &CapacityOptions) -> crate::Result<Outcome> {
    let rep = energy_constrained_capacities(chan, constraint, opts)?;
    capacity_lines(&mut emit, "C_bar(H,h)", &rep.holevo);
    capacity_lines(&mut emit, "C_ea(H,h)", &rep.ea);
    emit.line(format!("energies {:.6} / {:.6} (bound {})", rep.holevo_energy, rep.ea_energy, constraint.bound));
    if let Some(eb) = &rep.equality_diagnostic {
        eb_lines(&mut emit, eb);
    }
    for n in &rep.notes {
        emit.line(format!("note: {n}"));
    }
    let report = EnergyReport {
        bound: constraint.bound,
        holevo: (&rep.holevo).into(),
        entanglement_assisted: (&rep.ea).into(),
        holevo_energy: rep.holevo_energy,
        ea_energy: rep.ea_energy,
        holevo_multiplier: rep.holevo_multiplier,
        ea_multiplier: rep.ea_multiplier,
        ground_space_dim: rep.ground_space_dim,
        equality_diagnostic: rep.equality_diagnostic.map(Into::into),
        notes: rep.notes,
    };
    Ok(emit.finish(&report))
}

#[derive(Serialize)]
struct MutinfoReport {
    input_entropy: EntropyValue,
    output_entropy: EntropyValue,
    environment_entropy: EntropyValue,
    mutual_info: EntropyValue,
    mutual_info_relative: EntropyValue,
    coherent_info: EntropyValue,
}

fn cmd_mutinfo(mut emit: Emit, chan: &KrausChannel, rho: &DensityMatrix) -> crate::Result<Outcome> {
    let comp = complementary_of_kraus(chan.kraus_ops())?;
    let report = MutinfoReport {
        input_entropy: vn_entropy(rho),
        output_entropy: vn_entropy(&chan.apply(rho)?),
        environment_entropy: vn_entropy(&comp.apply(rho)?),
        mutual_info: mutual_info(chan, rho)?,
        mutual_info_relative: mutual_info_relative(chan, rho)?,
        coherent_info: coherent_info(chan, rho)?,
    };
    emit.line(format!("H(rho)        {}", report.input_entropy));
    emit.line(format!("H(Phi(rho))   {}", report.output_entropy));
    emit.line(format!("H(Phi^(rho))  {}", report.environment_entropy));
    emit.line(format!("I(Phi,rho)    {}", report.mutual_info));
    emit.line(format!("Ic(Phi,rho)   {}", report.coherent_info));
    Ok(emit.finish(&report))
}

/// Points on the real great circle of the qubit sphere, `θ_j = jπ/n`.
pub const TRINE_GRID: usize = 512;

/// Minimum over the real input grid of the second-largest output eigenvalue of the trine channel.
pub fn trine_grid_min_second_eigenvalue(points: usize) -> crate::Result<f64> {
    let chan = trine();
    let mut min = f64::INFINITY;
    for j in 0..points {
        let t = std::f64::consts::PI * j as f64 / points as f64;
        let psi = PureStateVector::new(CVector::from_vec(vec![re(t.cos()), re(t.sin())]))?;
        let out = chan.apply(&psi.projector())?;
        let ev = out.eigenvalues();
        min = min.min(ev[ev.len() - 2]);
    }
    Ok(min)
}

pub fn trine_ensemble() -> crate::Result<Ensemble> {
    let items = trine_vectors()
        .into_iter()
        .map(|v| Ok((1.0 / 3.0, PureStateVector::normalized(v)?.projector())))
        .collect::<crate::Result<Vec<_>>>()?;
    Ensemble::new(items)
}

/// Uniform ensemble of the four Bell states.
pub fn bell_ensemble() -> crate::Result<Ensemble> {
    let h = 0.5f64.sqrt();
    let rows = [[h, 0.0, 0.0, h], [h, 0.0, 0.0, -h], [0.0, h, h, 0.0], [0.0, h, -h, 0.0]];
    let items = rows
        .iter()
        .map(|a| Ok((0.25, PureStateVector::new(CVector::from_iterator(4, a.iter().map(|&x| re(x))))?.projector())))
        .collect::<crate::Result<Vec<_>>>()?;
    Ensemble::new(items)
}

#[derive(Serialize)]
struct TrineDemo {
    chi_in: EntropyValue,
    chi_out: EntropyValue,
    gap: f64,
    max_residual: f64,
    per_state_residuals: Vec<f64>,
    grid_points: usize,
    grid_min_second_eigenvalue: f64,
}

fn demo_trine(mut emit: Emit) -> crate::Result<Outcome> {
    let audit = reversibility_audit(&trine(), &trine_ensemble()?)?;
    let lam2 = trine_grid_min_second_eigenvalue(TRINE_GRID)?;
    emit.line(format!("chi_in  {}", audit.chi_in));
    emit.line(format!("chi_out {}", audit.chi_out));
    emit.line(format!("gap {:.6} bits, max recovery residual {:.6}", audit.gap, audit.max_residual()));
    emit.line(format!("min second-largest output eigenvalue over {TRINE_GRID} inputs: {lam2:.9} (1/6 = {:.9})", 1.0 / 6.0));
    emit.check(audit.gap > 0.01, format!("gap {} not above 0.01", audit.gap));
    emit.check(audit.max_residual() > 0.1, format!("max residual {} not above 0.1", audit.max_residual()));
    emit.check((lam2 - 1.0 / 6.0).abs() <= 1e-6, format!("grid minimum {lam2} differs from 1/6"));
    let report = TrineDemo {
        chi_in: audit.chi_in,
        chi_out: audit.chi_out,
        gap: audit.gap,
        max_residual: audit.max_residual(),
        per_state_residuals: audit.per_state_residuals.clone(),
        grid_points: TRINE_GRID,
        grid_min_second_eigenvalue: lam2,
    };
    Ok(emit.finish(&report))
}

pub const RANDOM_TRIALS: usize = 100;

#[derive(Serialize)]
struct BellDemo {
    chi_in: EntropyValue,
    chi_out: EntropyValue,
    random_trials: usize,
    random_min_gap: f64,
}

fn demo_bell(mut emit: Emit, seed: u64) -> crate::Result<Outcome> {
    let tr = partial_trace_channel(2, 2);
    let ens = bell_ensemble()?;
    let chi_in = holevo(&ens)?;
    let chi_out = holevo_image(&tr, &ens)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_gap = f64::INFINITY;
    for _ in 0..RANDOM_TRIALS {
        let e = random::pure_ensemble(&mut rng, 4, 4);
        emit.check(e.average().is_full_rank(), "random ensemble average not full rank");
        min_gap = min_gap.min(holevo(&e)?.value() - holevo_image(&tr, &e)?.value());
    }
    emit.line(format!("chi_in  {:.6} bits", chi_in.value()));
    emit.line(format!("chi_out {:.6} bits", chi_out.value()));
    emit.line(format!("{RANDOM_TRIALS} random pure ensembles with full-rank average: min gap {min_gap:.6e}"));
    emit.check((chi_in.value() - 2.0).abs() <= 1e-10, format!("chi_in {chi_in} != 2"));
    emit.check(chi_out.value().abs() <= 1e-10, format!("chi_out {chi_out} != 0"));
    emit.check(min_gap > 0.0, format!("random gap {min_gap} not positive"));
    let report = BellDemo {
        chi_in,
        chi_out,
        random_trials: RANDOM_TRIALS,
        random_min_gap: min_gap,
    };
    Ok(emit.finish(&report))
}

#[derive(Serialize)]
struct DephasingDemo {
    gap: f64,
    per_state_residuals: Vec<f64>,
    complement_ranks: Vec<usize>,
    complement: ChannelDoc,
    equality_diagnostic: EbDoc,
}

fn demo_dephasing(mut emit: Emit, opts: &CapacityOptions) -> crate::Result<Outcome> {
    let chan = dephasing(2);
    let ens = Ensemble::new(vec![(0.5, DensityMatrix::basis(2, 0)), (0.5, DensityMatrix::basis(2, 1))])?;
    let audit = reversibility_audit(&chan, &ens)?;
    let rb = rank_bounded_complement(&chan, &ens, 1)?;
    let eb = eb_equality_diagnostic(&chan, ens.average(), opts)?;
    emit.line(format!("gap {:.3e}, max recovery residual {:.3e}", audit.gap, audit.max_residual()));
    emit.line(format!("rank-bounded complement, ranks {}:", fmt_list(&rb.per_op_numerical_rank)));
    emit.line(io::channel_to_json(&rb.channel));
    emit.line(format!("C_bar(I/2) {:.10}, I(I/2) {:.10}", eb.cbar, eb.mutual_info));
    eb_lines(&mut emit, &eb);
    emit.check(audit.gap <= 1e-10, format!("gap {} above 1e-10", audit.gap));
    emit.check(audit.max_residual() <= 1e-9, format!("residual {} above 1e-9", audit.max_residual()));
    emit.check(rb.per_op_numerical_rank.iter().all(|&k| k == 1), "complement Kraus ranks not all 1");
    emit.check(eb.equality, format!("C_bar and I differ by {}", eb.gap));
    let report = DephasingDemo {
        gap: audit.gap,
        per_state_residuals: audit.per_state_residuals.clone(),
        complement_ranks: rb.per_op_numerical_rank.clone(),
        complement: channel_doc(&rb.channel),
        equality_diagnostic: eb.into(),
    };
    Ok(emit.finish(&report))
}

#[derive(Serialize)]
struct ConcavityDemo {
    trials: usize,
    min_excess: f64,
}

fn demo_concavity(mut emit: Emit, seed: u64) -> crate::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_excess = f64::INFINITY;
    for _ in 0..RANDOM_TRIALS {
        let ens = random::pure_ensemble(&mut rng, 4, 4);
        emit.check(ens.average().is_full_rank(), "random ensemble average not full rank");
        let avg = cond_entropy(ens.average(), (2, 2))?.value();
        let mut parts = 0.0;
        for (p, r) in ens.items() {
            parts += p * cond_entropy(r, (2, 2))?.value();
        }
        min_excess = min_excess.min(avg - parts);
    }
    emit.line(format!(
        "H(A|B) of the average minus the average H(A|B), over {RANDOM_TRIALS} pure decompositions on 2x2: min {min_excess:.6e}"
    ));
    emit.check(min_excess > 0.0, format!("excess {min_excess} not positive"));
    let report = ConcavityDemo {
        trials: RANDOM_TRIALS,
        min_excess,
    };
    Ok(emit.finish(&report))
}

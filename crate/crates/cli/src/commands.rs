use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};
use telewit::bases::{basis_by_name, decompose_bipartite};
use telewit::fef::{fef_estimate, FefEngine, FefParams};
use telewit::io::{
    state_from_file, state_to_file, witness_from_file, witness_to_file, BuildSummary, Evaluation, InputRecord, MatrixFile,
    MatrixKind, ProductVectorFile, Report, ReportPayload, SCHEMA_VERSION,
};
use telewit::linalg::hermitian_eigen;
use telewit::measure::{default_basis_name, estimate_witness_expectation, MeasurementPlan};
use telewit::optimality::{certify, paper_kernel_vectors, search_kernel_vectors, Verdict, ZERO_EXPECTATION_TOL};
use telewit::states::{self, DensityMatrix};
use telewit::witness::{self, classify, validate, ValidationParams, WitnessKind, WitnessOperator};

use crate::{
    BuildArgs, CertifyArgs, Cli, Command, DecomposeArgs, EvalArgs, FefArgs, KindArg, MakeArgs, MeasureArgs, StateCmd,
    StateKind, ValidateArgs, WitnessCmd,
};

struct Run {
    inputs: Vec<InputRecord>,
    seeds: BTreeMap<String, u64>,
    summary: Vec<String>,
    exit: u8,
}

impl Run {
    fn new() -> Self {
        Self { inputs: Vec::new(), seeds: BTreeMap::new(), summary: Vec::new(), exit: 0 }
    }

    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(InputRecord { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    fn witness(&mut self, path: &Path) -> Result<WitnessOperator> {
        let text = self.read(path)?;
        let f = MatrixFile::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        witness_from_file(&f).with_context(|| format!("loading witness {}", path.display()))
    }

    fn state(&mut self, path: &Path) -> Result<DensityMatrix> {
        let text = self.read(path)?;
        let f = MatrixFile::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        state_from_file(&f).with_context(|| format!("loading state {}", path.display()))
    }

    fn say(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    let start = Instant::now();
    let mut run = Run::new();
    let result = dispatch(&cli.command, &mut run)?;
    let report = Report {
        schema_version: SCHEMA_VERSION.to_string(),
        command: std::env::args().collect(),
        inputs: run.inputs,
        seeds: run.seeds,
        result,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let text = report.to_json()?;
    if let Some(path) = &cli.report {
        write_file(path, &text)?;
    }
    let out = if cli.json { text } else { run.summary.join("\n") };
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{out}") {
        // A closed pipe (e.g. `| head`) is not an error of the run.
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
        _ => {}
    }
    Ok(ExitCode::from(run.exit))
}

fn dispatch(cmd: &Command, run: &mut Run) -> Result<ReportPayload> {
    match cmd {
        Command::Witness(WitnessCmd::Build(a)) => build(a, run),
        Command::Witness(WitnessCmd::Eval(a)) => eval(a, run),
        Command::Witness(WitnessCmd::Certify(a)) => certify_cmd(a, run),
        Command::State(StateCmd::Make(a)) => make(a, run),
        Command::Fef(a) => fef(a, run),
        Command::Decompose(a) => decompose(a, run),
        Command::Measure(a) => measure(a, run),
        Command::Validate(a) => validate_cmd(a, run),
    }
}

fn build(a: &BuildArgs, run: &mut Run) -> Result<ReportPayload> {
    let kind = match a.kind {
        KindArg::Tel => WitnessKind::Teleportation,
        KindArg::Ent => WitnessKind::Entanglement,
    };
    let d = a.dim as usize;
    let w = witness::build(kind, d)?;
    let min = w.min_eigenvalue()?;
    write_file(&a.out, &witness_to_file(&w)?.to_json()?)?;
    run.say(format!("wrote {} ({}, d = {d})", a.out.display(), w.provenance));
    run.say(format!("min eigenvalue {min:.12}"));
    Ok(ReportPayload::Build(BuildSummary {
        kind: MatrixKind::Witness,
        dims: vec![d, d],
        min_eigenvalue: min,
        out: a.out.display().to_string(),
    }))
}

fn eval(a: &EvalArgs, run: &mut Run) -> Result<ReportPayload> {
    let w = run.witness(&a.witness)?;
    let rho = run.state(&a.state)?;
    if rho.dims() != (w.d, w.d) {
        bail!("witness acts on {0}x{0}, state is {1}x{2}", w.d, rho.dims().0, rho.dims().1);
    }
    let value = witness::evaluate(&w, &rho)?;
    let verdict = classify(value, a.tol);
    run.say(format!("Tr(W rho) = {value:.12}"));
    run.say(verdict.as_str());
    Ok(ReportPayload::Evaluation(Evaluation { value, tol: a.tol, verdict }))
}

fn certify_cmd(a: &CertifyArgs, run: &mut Run) -> Result<ReportPayload> {
    let w = run.witness(&a.witness)?;
    let vectors = match a.vectors.as_str() {
        "builtin" => paper_kernel_vectors(w.d).map_err(|_| anyhow!("builtin vectors exist for d = 2, 3 only (witness has d = {})", w.d))?,
        "search" => {
            if a.attempts == 0 {
                bail!("--attempts must be at least 1");
            }
            run.seeds.insert("kernel_search".into(), a.seed);
            let found = search_kernel_vectors(&w, a.attempts, a.seed, ZERO_EXPECTATION_TOL)?;
            if found.is_empty() {
                run.say(format!("search found no zero-expectation product vectors in {} attempts", a.attempts));
            }
            found
        }
        path => {
            let text = run.read(Path::new(path))?;
            ProductVectorFile::parse(&text)?.to_vectors()?
        }
    };
    if vectors.is_empty() {
        // An empty set cannot certify anything; report it as such.
        return Ok(ReportPayload::Certificate(telewit::optimality::OptimalityCertificate {
            witness: w.provenance.clone(),
            vectors: Vec::new(),
            span_rank: 0,
            required_rank: w.d * w.d,
            zero_tol: ZERO_EXPECTATION_TOL,
            rank_tol: telewit::linalg::RANK_TOL,
            verdict: Verdict::NotCertified,
            note: "search incomplete, not evidence of non-optimality".into(),
        }));
    }
    let cert = certify(&w, &vectors, ZERO_EXPECTATION_TOL)?;
    let worst = cert.vectors.iter().fold(0.0f64, |m, v| m.max(v.expectation.abs()));
    run.say(format!("{} vectors, max |expectation| {worst:.3e}", cert.vectors.len()));
    run.say(format!("span rank {} of {}", cert.span_rank, cert.required_rank));
    run.say(match cert.verdict {
        Verdict::OptimalCertified => "optimal_certified".to_string(),
        Verdict::NotCertified => format!("not_certified ({})", cert.note),
    });
    Ok(ReportPayload::Certificate(cert))
}

fn make(a: &MakeArgs, run: &mut Run) -> Result<ReportPayload> {
    let need_dim = || a.dim.map(usize::from).ok_or_else(|| anyhow!("--dim is required for this kind"));
    let mut seed = None;
    let (rho, provenance) = match a.kind {
        StateKind::Iso => {
            let alpha = a.alpha.ok_or_else(|| anyhow!("--alpha is required for iso"))?;
            (states::isotropic(need_dim()?, alpha)?, format!("isotropic alpha={alpha}"))
        }
        StateKind::BellDiag => {
            if a.dim.is_some_and(|d| d != 2) {
                bail!("bell-diag states are two-qubit; --dim must be 2");
            }
            let c = a.c.as_deref().ok_or_else(|| anyhow!("--c C1,C2,C3 is required for bell-diag"))?;
            if c.len() != 3 {
                bail!("--c takes exactly three values, got {}", c.len());
            }
            (states::bell_diagonal(c[0], c[1], c[2])?, format!("bell_diagonal c=({},{},{})", c[0], c[1], c[2]))
        }
        StateKind::Maxent => {
            let d = need_dim()?;
            (states::max_entangled(d)?.density((d, d))?, "max_entangled".to_string())
        }
        StateKind::Random => {
            seed = Some(a.seed);
            (states::random_density(need_dim()?, a.seed)?, "random_density".to_string())
        }
        StateKind::Product => {
            seed = Some(a.seed);
            let d = need_dim()?;
            let v = states::random_product_pure(d, a.seed)?;
            (DensityMatrix::new((d, d), v.projector())?, "random_product_pure".to_string())
        }
    };
    if let Some(s) = seed {
        run.seeds.insert("state".into(), s);
    }
    let (da, db) = rho.dims();
    let min = hermitian_eigen(rho.matrix())?.min();
    write_file(&a.out, &state_to_file(&rho, &provenance, seed)?.to_json()?)?;
    run.say(format!("wrote {} ({provenance}, {da}x{db})", a.out.display()));
    Ok(ReportPayload::Build(BuildSummary {
        kind: MatrixKind::State,
        dims: vec![da, db],
        min_eigenvalue: min,
        out: a.out.display().to_string(),
    }))
}

fn fef(a: &FefArgs, run: &mut Run) -> Result<ReportPayload> {
    let rho = run.state(&a.state)?;
    let params = FefParams { restarts: a.restarts, seed: a.seed, ..FefParams::default() };
    run.seeds.insert("fef".into(), a.seed);
    let res = fef_estimate(&rho, &params)?;
    run.say(format!("FEF >= {:.12} (singlet fraction {:.12})", res.estimate, res.lower_bound));
    run.say(format!("{} random starts, {} abandoned, best start {}", res.restarts_used, res.rank_deficient_restarts, res.best_start));
    Ok(ReportPayload::Fef(res))
}

fn decompose(a: &DecomposeArgs, run: &mut Run) -> Result<ReportPayload> {
    let w = run.witness(&a.witness)?;
    let basis = basis_by_name(a.basis.name(), w.d)?;
    let dec = decompose_bipartite(&w.matrix, &basis)?;
    run.say(format!("{} terms over {}", dec.terms.len(), dec.basis_id));
    for t in &dec.terms {
        let hbar = if t.hbar_power == 0 { String::new() } else { format!("  [hbar^-{}]", t.hbar_power) };
        run.say(format!("{:>+.12}  {}{hbar}", t.coefficient, t.label()));
    }
    Ok(ReportPayload::Decomposition(dec))
}

fn measure(a: &MeasureArgs, run: &mut Run) -> Result<ReportPayload> {
    let w = run.witness(&a.witness)?;
    let rho = run.state(&a.state)?;
    if rho.dims() != (w.d, w.d) {
        bail!("witness acts on {0}x{0}, state is {1}x{2}", w.d, rho.dims().0, rho.dims().1);
    }
    let basis = a.basis.map_or(default_basis_name(w.d), |b| b.name());
    let plan = MeasurementPlan::with_basis(&w, basis, a.shots, a.seed)?;
    run.seeds.insert("measure".into(), a.seed);
    let r = estimate_witness_expectation(&w, &rho, &plan, a.z)?;
    run.say(format!("estimate {:.6} +/- {:.6} ({} terms, {} shots each)", r.point_estimate, r.standard_error, r.per_term.len(), a.shots));
    run.say(format!("{} at z = {}", r.verdict.as_str(), r.z));
    run.say(r.note.clone());
    Ok(ReportPayload::Estimate(r))
}

fn validate_cmd(a: &ValidateArgs, run: &mut Run) -> Result<ReportPayload> {
    let w = run.witness(&a.witness)?;
    let params = ValidationParams { samples: a.samples, seed: a.seed, ..ValidationParams::default() };
    run.seeds.insert("validate".into(), a.seed);
    let report = validate(&w, &FefEngine::default(), &params)?;
    if report.passed() {
        run.say(format!("passed: {} random states, {} product states", report.state_seeds.len(), report.separable_seeds.len()));
    } else {
        run.exit = 1;
        run.say(format!("FAILED: {} check(s)", report.failures.len()));
        for f in &report.failures {
            let seed = f.seed.map_or(String::new(), |s| format!(" seed {s}"));
            run.say(format!("  {:?}{seed}: value {:.3e}, bound {:.3e}", f.check, f.value, f.bound));
        }
    }
    if !report.note.is_empty() {
        run.say(report.note.clone());
    }
    Ok(ReportPayload::Validation(report))
}

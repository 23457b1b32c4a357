use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;

use ffdistlab::combinatorics::{
    distance_set_diff, distance_set_sum, dot_product_set, energy_k, k_distance_set, DistanceSet,
};
use ffdistlab::harness::report::{audit_csv, csv_document, emit, to_json};
use ffdistlab::harness::{
    audit_lemma, parse_rational, scan_thresholds, threshold_exponent, verify_identities, ExperimentConfig, Fault,
    Format, LemmaId, SizeSpec, TheoremParams, ThresholdRule, VarietyChoice, VerifyOptions,
};
use ffdistlab::spectral::{energy_via_spectrum, regular_audit};
use ffdistlab::variety::{max_affine_subspace, size_profile, AffineSubspaceReport, SizeProfile};
use ffdistlab::{Ambient, Error, FieldSpec, PointSet, Result};

/// Exact experiments on distance sets, energies and Fourier decay over
/// finite fields.
#[derive(Parser)]
#[command(name = "ffdistlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Size profile, Fourier decay constant and largest affine subspace of a variety.
    AuditVariety(AuditVarietyArgs),
    /// Exact additive energy E_k of a point set.
    Energy(EnergyArgs),
    /// Distance, sum-distance or dot-product set of a point set.
    Distset(DistsetArgs),
    /// Scan |Δ_k(A)| against subset size, next to a predicted threshold.
    Scan(ScanArgs),
    /// Audit an energy inequality on seeded random subsets.
    AuditLemma(AuditLemmaArgs),
    /// Run the exact identity suites.
    Verify(VerifyArgs),
    /// Print a predicted threshold exponent.
    Threshold(ThresholdArgs),
}

#[derive(Args, Clone)]
struct FieldArgs {
    /// Field order q = p^e, p an odd prime.
    #[arg(long)]
    q: u64,
    /// Coefficients c0,c1,...,ce of a monic irreducible modulus for e > 1.
    #[arg(long, value_delimiter = ',')]
    ext_modulus: Option<Vec<u32>>,
    /// Ambient dimension.
    #[arg(long)]
    d: usize,
}

#[derive(Args, Clone)]
struct VarietyArgs {
    /// sphere:<j>, hyperplane or poly:<file>.
    #[arg(long, default_value = "sphere:1")]
    variety: String,
    /// Declared dimension of a poly variety.
    #[arg(long)]
    declared_dim: Option<usize>,
    /// Declared degree of a poly variety.
    #[arg(long)]
    declared_deg: Option<u32>,
}

#[derive(Args, Clone)]
struct SamplingArgs {
    #[arg(long, default_value_t = 3)]
    k: u32,
    /// Comma list, geom:<start>:<end> or geom:<start>:max.
    #[arg(long, default_value = "geom:1:max")]
    sizes: String,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// |Δ_k| ≥ fraction·q counts as order q.
    #[arg(long, default_value = "1/4")]
    ggq_fraction: String,
    /// Constant c in (0, 1] for the dimension rule.
    #[arg(long, default_value = "1")]
    c: String,
    /// Constant β in [4^-n, 2^(1-n)]; defaults to 4^-n.
    #[arg(long)]
    beta: Option<String>,
}

#[derive(Args, Clone)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl OutputArgs {
    fn format(&self, default: Format) -> Format {
        match self.format {
            Some(FormatArg::Json) => Format::Json,
            Some(FormatArg::Csv) => Format::Csv,
            None => default,
        }
    }
}

#[derive(Args)]
struct AuditVarietyArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[command(flatten)]
    variety: VarietyArgs,
    /// Largest flat dimension searched (at most 2).
    #[arg(long, default_value_t = 2)]
    dim_cap: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct PointSource {
    /// Points as `x1,x2,...;y1,y2,...` (field element indices).
    #[arg(long, conflicts_with = "variety")]
    points: Option<String>,
    /// Use a whole variety instead of explicit points.
    #[arg(long)]
    variety: Option<String>,
}

#[derive(Args)]
struct EnergyArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[command(flatten)]
    source: PointSource,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DistKind {
    /// {|x_1+...+x_k|}.
    Sum,
    /// {|x-y|}.
    Diff,
    /// {x·y}.
    Dot,
}

#[derive(Args)]
struct DistsetArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[command(flatten)]
    source: PointSource,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long, value_enum, default_value = "sum")]
    kind: DistKind,
    /// Drop x = y pairs from the difference set.
    #[arg(long)]
    no_diagonal: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[command(flatten)]
    variety: VarietyArgs,
    #[command(flatten)]
    sampling: SamplingArgs,
    /// Threshold rule for the predicted exponent.
    #[arg(long)]
    rule: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct AuditLemmaArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[command(flatten)]
    variety: VarietyArgs,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[arg(long)]
    lemma: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Restrict to one field order (with --d).
    #[arg(long, requires = "d")]
    q: Option<u64>,
    #[arg(long, requires = "q")]
    d: Option<usize>,
    /// Random subsets per case and kind.
    #[arg(long, default_value_t = 25)]
    sets: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, hide = true)]
    inject_fault: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    rule: String,
    #[arg(long)]
    d: u32,
    /// Variety dimension; defaults to d - 1.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 3)]
    k: u32,
    #[arg(long, default_value = "0")]
    alpha: String,
    #[arg(long, default_value = "1")]
    c: String,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    q: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

fn field(args: &FieldArgs) -> Result<Arc<FieldSpec>> {
    Ok(Arc::new(FieldSpec::from_order(args.q, args.ext_modulus.as_deref())?))
}

fn config(field: &FieldArgs, variety: &VarietyArgs, sampling: Option<&SamplingArgs>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(field.q, field.d, VarietyChoice::parse(&variety.variety)?);
    cfg.ext_modulus = field.ext_modulus.clone();
    cfg.declared_dim = variety.declared_dim;
    cfg.declared_deg = variety.declared_deg;
    if let Some(s) = sampling {
        cfg.k = s.k;
        cfg.sizes = s.sizes.parse::<SizeSpec>()?;
        cfg.samples = s.samples;
        cfg.seed = s.seed;
        cfg.ggq_fraction = parse_rational(&s.ggq_fraction)?;
        cfg.c = parse_rational(&s.c)?;
        cfg.beta = s.beta.as_deref().map(parse_rational).transpose()?;
    }
    Ok(cfg)
}

fn parse_points(ambient: &Ambient, text: &str) -> Result<PointSet> {
    let mut points = Vec::new();
    for chunk in text.split(';').map(str::trim).filter(|c| !c.is_empty()) {
        let coords = chunk
            .split(',')
            .map(|c| c.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad coordinate {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        points.push(ambient.point(&coords)?);
    }
    Ok(PointSet::from_points(ambient, &points))
}

fn point_set(field_args: &FieldArgs, source: &PointSource) -> Result<PointSet> {
    match (&source.points, &source.variety) {
        (Some(p), _) => {
            let ambient = Ambient::new(field(field_args)?, field_args.d)?;
            parse_points(&ambient, p)
        }
        (None, Some(v)) => {
            let variety = VarietyArgs {
                variety: v.clone(),
                declared_dim: None,
                declared_deg: None,
            };
            Ok(config(field_args, &variety, None)?.build()?.variety.points().clone())
        }
        (None, None) => Err(Error::Hypothesis("give --points or --variety".into())),
    }
}

fn render<T: Serialize>(value: &T, format: Format, csv: impl FnOnce(&T) -> String) -> Result<String> {
    match format {
        Format::Json => to_json(value),
        Format::Csv => Ok(csv(value)),
    }
}

#[derive(Serialize)]
struct VarietyReport {
    q: u64,
    d: usize,
    variety: String,
    config_hash: String,
    declared_dim: usize,
    declared_deg: u32,
    size_profile: SizeProfile,
    size_ratio: f64,
    max_coefficient: f64,
    decay_constant: f64,
    t_v: u64,
    affine_subspace: AffineSubspaceReport,
}

fn audit_variety(args: &AuditVarietyArgs) -> Result<String> {
    let cfg = config(&args.field, &args.variety, None)?;
    let exp = cfg.build()?;
    let audit = regular_audit(&exp.variety)?;
    let flats = max_affine_subspace(&exp.variety, args.dim_cap.min(exp.ambient.d()))?;
    let report = VarietyReport {
        q: cfg.q,
        d: cfg.d,
        variety: cfg.variety.to_string(),
        config_hash: cfg.hash(),
        declared_dim: exp.variety.def().declared_dim(),
        declared_deg: exp.variety.def().declared_deg(),
        size_profile: size_profile(&exp.variety),
        size_ratio: audit.size_ratio,
        max_coefficient: audit.max_coefficient,
        decay_constant: audit.decay_constant,
        t_v: flats.t_v,
        affine_subspace: flats,
    };
    render(&report, args.output.format(Format::Json), |r| {
        csv_document(
            "q,d,variety,size,expected_size,size_ratio,max_coefficient,decay_constant,t_v",
            [format!(
                "{},{},{},{},{},{},{},{},{}",
                r.q,
                r.d,
                r.variety,
                r.size_profile.size,
                r.size_profile.expected,
                r.size_ratio,
                r.max_coefficient,
                r.decay_constant,
                r.t_v
            )],
        )
    })
}

#[derive(Serialize)]
#[serde(untagged)]
enum Exact {
    Small(u64),
    Big(String),
}

impl From<&BigUint> for Exact {
    fn from(v: &BigUint) -> Exact {
        u64::try_from(v).map(Exact::Small).unwrap_or_else(|_| Exact::Big(v.to_string()))
    }
}

#[derive(Serialize)]
struct EnergyReport {
    k: u32,
    size: usize,
    energy: Exact,
    /// `None` when the spectral sum could not be certified as an integer.
    spectral_energy: Option<u64>,
}

fn energy(args: &EnergyArgs) -> Result<String> {
    let a = point_set(&args.field, &args.source)?;
    let exact = energy_k(&a, args.k)?;
    let spectral = match energy_via_spectrum(&a, args.k) {
        Ok(v) => Some(v),
        Err(Error::Numerical { .. }) => None,
        Err(e) => return Err(e),
    };
    if let Some(s) = spectral {
        if BigUint::from(s) != exact.value {
            return Err(Error::IdentityViolation {
                check: format!("E_{} convolution vs spectral", args.k),
                witness: format!("Σμ² = {}, spectral = {s}", exact.value),
            });
        }
    }
    let report = EnergyReport {
        k: args.k,
        size: a.len(),
        energy: (&exact.value).into(),
        spectral_energy: spectral,
    };
    render(&report, args.output.format(Format::Json), |r| {
        let spectral = r.spectral_energy.map(|s| s.to_string()).unwrap_or_default();
        csv_document("k,size,energy,spectral_energy", [format!("{},{},{},{spectral}", r.k, r.size, exact.value)])
    })
}

#[derive(Serialize)]
struct DistsetReport {
    kind: DistKind,
    k: u32,
    size: usize,
    count: usize,
    covers_units: bool,
    values: DistanceSet,
}

fn distset(args: &DistsetArgs) -> Result<String> {
    let a = point_set(&args.field, &args.source)?;
    let set = match args.kind {
        DistKind::Sum if args.k == 2 => distance_set_sum(&a, &a)?,
        DistKind::Sum => k_distance_set(&a, args.k)?,
        DistKind::Diff => distance_set_diff(&a, !args.no_diagonal),
        DistKind::Dot => dot_product_set(&a),
    };
    let report = DistsetReport {
        kind: args.kind,
        k: args.k,
        size: a.len(),
        count: set.len(),
        covers_units: set.covers_units(),
        values: set,
    };
    render(&report, args.output.format(Format::Json), |r| {
        csv_document("value", r.values.values().iter().map(u32::to_string))
    })
}

fn scan(args: &ScanArgs) -> Result<String> {
    let rule: ThresholdRule = args.rule.parse()?;
    let exp = config(&args.field, &args.variety, Some(&args.sampling))?.build()?;
    let report = scan_thresholds(&exp, rule)?;
    render(&report, args.output.format(Format::Csv), |r| r.to_csv())
}

fn audit(args: &AuditLemmaArgs) -> Result<String> {
    let lemma: LemmaId = args.lemma.parse()?;
    let exp = config(&args.field, &args.variety, Some(&args.sampling))?.build()?;
    let report = audit_lemma(lemma, &exp)?;
    render(&report, args.output.format(Format::Json), audit_csv)
}

fn verify(args: &VerifyArgs) -> Result<(String, Result<()>)> {
    let mut opts = VerifyOptions {
        random_sets: args.sets,
        seed: args.seed,
        fault: args.inject_fault.then_some(Fault::FlipMu),
        ..VerifyOptions::default()
    };
    if let (Some(q), Some(d)) = (args.q, args.d) {
        opts.cases = vec![(q, d)];
    }
    let summary = verify_identities(&opts)?;
    let text = render(&summary, args.output.format(Format::Json), |s| {
        csv_document(
            "check,instances,failures",
            s.checks.iter().map(|c| format!("{},{},{}", c.name, c.instances, c.failures)),
        )
    })?;
    Ok((text, summary.into_result().map(|_| ())))
}

#[derive(Serialize)]
struct ThresholdReport {
    rule: ThresholdRule,
    exponent: String,
    exponent_value: f64,
    provenance: String,
}

fn threshold(args: &ThresholdArgs) -> Result<String> {
    let rule: ThresholdRule = args.rule.parse()?;
    let mut p = TheoremParams::new(args.d, args.n.unwrap_or(args.d.saturating_sub(1)), args.k)
        .with_alpha(parse_rational(&args.alpha)?)
        .with_c(parse_rational(&args.c)?);
    if let Some(b) = &args.beta {
        p = p.with_beta(parse_rational(b)?);
    }
    if let Some(q) = args.q {
        p = p.with_q(q);
    }
    let tau = threshold_exponent(rule, &p)?;
    let report = ThresholdReport {
        rule,
        exponent: tau.to_string(),
        exponent_value: num_traits::ToPrimitive::to_f64(&tau).unwrap_or(f64::NAN),
        provenance: format!("d={} n={} k={} alpha={} c={} beta={}", p.d, p.n, p.k, p.alpha, p.c, p.beta()),
    };
    render(&report, args.output.format(Format::Json), |r| {
        csv_document("rule,exponent,exponent_value", [format!("{},{},{}", r.rule, r.exponent, r.exponent_value)])
    })
}

fn run(cli: &Cli) -> Result<()> {
    let (text, out, status) = match &cli.command {
        Command::AuditVariety(a) => (audit_variety(a)?, &a.output.out, Ok(())),
        Command::Energy(a) => (energy(a)?, &a.output.out, Ok(())),
        Command::Distset(a) => (distset(a)?, &a.output.out, Ok(())),
        Command::Scan(a) => (scan(a)?, &a.output.out, Ok(())),
        Command::AuditLemma(a) => (audit(a)?, &a.output.out, Ok(())),
        Command::Verify(a) => {
            let (text, status) = verify(a)?;
            (text, &a.output.out, status)
        }
        Command::Threshold(a) => (threshold(a)?, &a.output.out, Ok(())),
    };
    emit(&text, out.as_deref())?;
    status
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

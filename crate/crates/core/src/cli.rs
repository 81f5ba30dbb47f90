//! The `qnk` command-line interface.
//!
//! Every run embeds its fully resolved configuration in the output header
//! (`# config {...}` comment line for CSV, a `config` object for JSON) so
//! results can be reproduced from the artifact alone. All randomness flows
//! from the explicit `--seed`; `QNK_THREADS` caps the rayon pool without
//! changing any output byte.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fieldio::{read_field_path, write_field_path};
use crate::grid::{
    nonuniform_grid, periodic_grid, sample_field, uniform_grid, FieldId, GridSpec, NonuniformFamily,
};
use crate::meshbias::{bias_sweep, SweepFamily};
use crate::normalize::{forward, NormMethod, NormSpec};
use crate::opsim::{depth_scaling_experiment, gap_scaling_experiment, StackSpec};
use crate::quadrature::{weights_for_grid, Rule};
use crate::resample::{interpolate, InterpMethod};
use crate::statkit::{
    bootstrap_improvement_ci, cohens_d, paired_t_test, tost_equivalence, PairedSamples,
};
use crate::stats::{blend_moments, uniform_moments, weighted_moments, ReductionPattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "qnk",
    version,
    about = "Quadrature-weighted normalization toolkit"
)]
struct Cli {
    /// Seed for every random draw in the run.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Output path; tabular commands print to stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct GridArgs {
    /// Nodes per axis, comma separated (e.g. 65 or 65,65).
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// uniform | periodic | chebyshev | boundary-refined | custom
    #[arg(long, default_value = "uniform")]
    grid_kind: String,
    /// Stretching strength for boundary-refined axes.
    #[arg(long, default_value_t = 2.0)]
    strength: f64,
    /// Explicit coordinates for custom 1D grids, comma separated.
    #[arg(long, value_delimiter = ',')]
    coords: Option<Vec<f64>>,
}

impl GridArgs {
    fn build(&self) -> Result<GridSpec> {
        if self.n.is_empty() && self.coords.is_none() {
            return Err(Error::InvalidArgument("--n is required".into()));
        }
        match self.grid_kind.as_str() {
            "uniform" => uniform_grid(&self.n),
            "periodic" => periodic_grid(&self.n),
            "chebyshev" => nonuniform_grid(&NonuniformFamily::Chebyshev, &self.n),
            "boundary-refined" | "boundary_refined" => nonuniform_grid(
                &NonuniformFamily::BoundaryRefined {
                    strength: self.strength,
                },
                &self.n,
            ),
            "custom" => {
                let coords = self
                    .coords
                    .clone()
                    .ok_or_else(|| Error::InvalidArgument("custom grids need --coords".into()))?;
                let n = coords.len();
                crate::grid::nonuniform_grid_1d(&NonuniformFamily::Custom(coords), n)
            }
            other => Err(Error::InvalidArgument(format!(
                "unknown grid kind '{other}'"
            ))),
        }
    }

    fn describe(&self) -> Value {
        json!({
            "n": self.n,
            "grid_kind": self.grid_kind,
            "strength": self.strength,
            "coords": self.coords,
        })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample an analytic field onto a grid and write a field file.
    Sample {
        #[arg(long)]
        field: String,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1)]
        channels: usize,
    },
    /// Print a quadrature weight vector / field as CSV.
    Weights {
        #[arg(long, default_value = "trapezoid")]
        rule: String,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Compute moments of a field file under a rule and reduction pattern.
    Moments {
        #[arg(long)]
        input: PathBuf,
        /// uniform | trapezoid | simpson | boole | control-volume | auto
        #[arg(long, default_value = "auto")]
        rule: String,
        /// instance | layer | group:G
        #[arg(long, default_value = "layer")]
        pattern: String,
        /// Blend coefficient; when set, emits blended layer moments.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Run a normalization forward pass on a field file.
    Normalize {
        #[arg(long)]
        input: PathBuf,
        /// none | layernorm | instancenorm | groupnorm:G | rmsnorm |
        /// quadnorm:{layer|instance|group:G} | blendquadnorm:ALPHA
        #[arg(long)]
        method: String,
        #[arg(long, default_value_t = crate::normalize::DEFAULT_EPSILON)]
        epsilon: f64,
        /// Per-channel affine scale, comma separated.
        #[arg(long, value_delimiter = ',')]
        gamma: Option<Vec<f64>>,
        /// Per-channel affine shift, comma separated.
        #[arg(long, value_delimiter = ',')]
        beta: Option<Vec<f64>>,
    },
    /// Resample a field file onto a new resolution.
    Resample {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        target_n: Vec<usize>,
        #[arg(long, default_value = "bicubic")]
        method: String,
    },
    /// Statistic-mismatch ladder with fitted convergence orders.
    Consistency {
        #[arg(long)]
        field: String,
        #[arg(long, default_value = "trapezoid")]
        rule: String,
        #[arg(long, default_value = "layer")]
        pattern: String,
        #[arg(long, value_delimiter = ',', default_value = "17,33,65,129,257")]
        ladder: Vec<usize>,
        /// Grid dimension; defaults to the field's native dimension.
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Frozen-stack transfer experiments.
    Opsim {
        #[command(subcommand)]
        experiment: OpsimCommand,
    },
    /// Uniform vs control-volume bias sweep on skewed meshes.
    Meshbias {
        #[arg(long, default_value = "bump2d")]
        field: String,
        #[arg(long, default_value = "boundary-refined")]
        family: String,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
        strengths: Vec<f64>,
        #[arg(long, default_value_t = 64)]
        n: usize,
    },
    /// Paired statistics battery over two (seed, error) CSV files.
    Stats {
        /// Baseline results (two-column CSV: seed, error).
        #[arg(long)]
        baseline: PathBuf,
        /// Method results (two-column CSV: seed, error).
        #[arg(long)]
        method: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        margin: f64,
        #[arg(long, default_value_t = 10000)]
        resamples: usize,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
    },
    /// Run the acceptance battery and print one PASS/FAIL line per criterion.
    VerifyAll,
}

#[derive(Debug, Subcommand)]
enum OpsimCommand {
    /// Discrepancy against the resolution ratio.
    Gap {
        #[arg(long, default_value = "mixed2d")]
        field: String,
        #[arg(long, default_value_t = 17)]
        source_n: usize,
        #[arg(long, value_delimiter = ',', default_value = "33,65,129,257")]
        targets: Vec<usize>,
        #[command(flatten)]
        stack: StackArgs,
    },
    /// Discrepancy against network depth.
    Depth {
        #[arg(long, default_value = "mixed2d")]
        field: String,
        #[arg(long, default_value_t = 17)]
        source_n: usize,
        #[arg(long, default_value_t = 129)]
        target_n: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        depths: Vec<usize>,
        #[command(flatten)]
        stack: StackArgs,
    },
}

#[derive(Debug, Clone, Args)]
struct StackArgs {
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long, default_value_t = 16)]
    width: usize,
    #[arg(long, default_value_t = 6)]
    modes: usize,
    #[arg(long, default_value = "gelu")]
    activation: String,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "none,layernorm,quadnorm:layer,blendquadnorm:0.3"
    )]
    methods: Vec<String>,
}

impl StackArgs {
    fn template(&self, dim: usize, seed: u64) -> Result<StackSpec> {
        let mut spec = StackSpec::new(self.depth, self.width, self.modes, dim, seed);
        spec.activation = crate::opsim::Activation::parse(&self.activation)?;
        Ok(spec)
    }

    fn parse_methods(&self) -> Result<Vec<NormMethod>> {
        self.methods.iter().map(|m| NormMethod::parse(m)).collect()
    }

    fn describe(&self) -> Value {
        json!({
            "depth": self.depth,
            "width": self.width,
            "modes": self.modes,
            "activation": self.activation,
            "methods": self.methods,
        })
    }
}

/// Table-shaped output with a config header and optional summary lines.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
    summary: Vec<(String, Value)>,
}

fn fnum(v: f64) -> Value {
    match serde_json::Number::from_f64(v) {
        Some(n) => Value::Number(n),
        None => Value::String(format!("{v}")),
    }
}

fn cell_to_csv(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn render(format: OutputFormat, config: &Value, table: &Table) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = format!("# config {config}\n");
            if !table.columns.is_empty() {
                out.push_str(&table.columns.join(","));
                out.push('\n');
            }
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(cell_to_csv).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            for (k, v) in &table.summary {
                out.push_str(&format!("# {k} {}\n", cell_to_csv(v)));
            }
            out
        }
        OutputFormat::Json => {
            let summary: serde_json::Map<String, Value> = table.summary.iter().cloned().collect();
            let obj = json!({
                "config": config,
                "columns": table.columns,
                "rows": table.rows,
                "summary": summary,
            });
            format!("{obj}\n")
        }
    }
}

fn write_output(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, content)?;
            println!("wrote {}", p.display());
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn base_config(cli: &Cli, command: &str, params: Value) -> Value {
    json!({
        "command": command,
        "seed": cli.seed,
        "format": match cli.format { OutputFormat::Csv => "csv", OutputFormat::Json => "json" },
        "threads": thread_cap(),
        "params": params,
    })
}

fn thread_cap() -> Option<usize> {
    std::env::var("QNK_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
}

fn parse_rule(s: &str) -> Result<Option<Rule>> {
    if s == "auto" {
        return Ok(None);
    }
    Ok(Some(Rule::parse(s)?))
}

fn weights_table(rule_str: &str, grid: &GridSpec) -> Result<Table> {
    let wf = match parse_rule(rule_str)? {
        None => crate::quadrature::quadrature_weights(grid)?,
        Some(rule) => weights_for_grid(grid, rule)?,
    };
    let shape = grid.spatial_shape();
    let flat = wf.flat();
    let mut rows = Vec::new();
    if shape.len() == 1 {
        rows.push(flat.iter().map(|w| fnum(*w)).collect());
    } else {
        // one CSV row per leading index, laid out row-major
        let row_len = *shape.last().unwrap();
        for chunk in flat.chunks(row_len) {
            rows.push(chunk.iter().map(|w| fnum(*w)).collect());
        }
    }
    Ok(Table {
        columns: vec![],
        rows,
        summary: vec![
            ("rule".into(), Value::String(wf.rule().label().into())),
            ("total_mass".into(), fnum(wf.total_mass())),
        ],
    })
}

fn moments_table(
    input: &PathBuf,
    rule_str: &str,
    pattern_str: &str,
    alpha: Option<f64>,
) -> Result<Table> {
    let x = read_field_path(input)?;
    let pattern = ReductionPattern::parse(pattern_str)?;
    let rule = parse_rule(rule_str)?;
    let m = match (alpha, rule) {
        (Some(a), _) => {
            if pattern != ReductionPattern::Layer {
                return Err(Error::InvalidArgument(
                    "blended moments use the layer pattern".into(),
                ));
            }
            let ln = uniform_moments(&x, pattern)?;
            let w = crate::quadrature::quadrature_weights(x.grid())?;
            let wln = weighted_moments(&x, &w, pattern)?;
            blend_moments(&ln, &wln, a)?
        }
        (None, Some(Rule::Uniform)) => uniform_moments(&x, pattern)?,
        (None, Some(rule)) => {
            let w = weights_for_grid(x.grid(), rule)?;
            weighted_moments(&x, &w, pattern)?
        }
        (None, None) => {
            let w = crate::quadrature::quadrature_weights(x.grid())?;
            weighted_moments(&x, &w, pattern)?
        }
    };
    let mut rows = Vec::new();
    for b in 0..m.mean().nrows() {
        for s in 0..m.mean().ncols() {
            rows.push(vec![
                Value::from(b),
                Value::from(s),
                fnum(m.mean()[(b, s)]),
                fnum(m.variance()[(b, s)]),
            ]);
        }
    }
    Ok(Table {
        columns: vec!["batch", "slice", "mean", "variance"],
        rows,
        summary: vec![("pattern".into(), Value::String(pattern.label()))],
    })
}

fn consistency_table(
    field: &str,
    rule: &str,
    pattern: &str,
    ladder: &[usize],
    dim: Option<usize>,
) -> Result<Table> {
    let field = FieldId::parse(field)?;
    let rule = Rule::parse(rule)?;
    let pattern = ReductionPattern::parse(pattern)?;
    let dim = dim.or(field.dim()).unwrap_or(1);
    let report = crate::consistency::consistency_ladder(&field, ladder, dim, rule, pattern)?;
    let rows = report
        .rungs
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                Value::from(i),
                Value::from(r.n),
                fnum(r.h),
                fnum(r.mean_mismatch),
                fnum(r.var_mismatch),
                Value::String(report.rule.label().into()),
                Value::String(report.pattern.label()),
            ]
        })
        .collect();
    Ok(Table {
        columns: vec![
            "rung",
            "n",
            "h",
            "mean_mismatch",
            "var_mismatch",
            "rule",
            "pattern",
        ],
        rows,
        summary: vec![
            ("fitted_order".into(), fnum(report.fitted_order)),
            ("fitted_order_var".into(), fnum(report.fitted_order_var)),
        ],
    })
}

fn scaling_table(report: &crate::opsim::ScalingReport) -> Table {
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                Value::String(r.method.clone()),
                Value::from(r.depth),
                fnum(r.ratio),
                fnum(r.h),
                fnum(r.h_prime),
                fnum(r.discrepancy),
            ]
        })
        .collect();
    let mut summary = Vec::new();
    for f in &report.fits {
        summary.push((format!("fit_{}_slope", f.method), fnum(f.slope)));
        summary.push((format!("fit_{}_intercept", f.method), fnum(f.intercept)));
    }
    Table {
        columns: vec!["method", "L", "r", "h", "h_prime", "discrepancy"],
        rows,
        summary,
    }
}

fn meshbias_table(field: &str, family: &str, strengths: &[f64], n: usize) -> Result<Table> {
    let field = FieldId::parse(field)?;
    let family = SweepFamily::parse(family)?;
    let reports = bias_sweep(&field, family, strengths, n)?;
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                fnum(r.nonuniformity_ratio),
                fnum(r.uniform_bias),
                fnum(r.weighted_bias),
                fnum(r.reduction_factor),
                Value::String(r.mesh.clone()),
                fnum(r.reference_mean),
                fnum(r.uniform_estimate),
                fnum(r.weighted_estimate),
            ]
        })
        .collect();
    Ok(Table {
        columns: vec![
            "ratio",
            "uniform_bias",
            "weighted_bias",
            "reduction_factor",
            "mesh",
            "reference_mean",
            "uniform_estimate",
            "weighted_estimate",
        ],
        rows,
        summary: vec![],
    })
}

/// Reads a two-column (seed, error) CSV; `#` comments and non-numeric header
/// lines are skipped.
fn read_paired_csv(path: &PathBuf) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let (a, b) = (parts.next(), parts.next());
        let (Some(a), Some(b)) = (a, b) else {
            return Err(Error::Format(format!("expected two columns, got '{line}'")));
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(seed), Ok(err)) => out.push((seed, err)),
            _ => continue, // header line
        }
    }
    if out.is_empty() {
        return Err(Error::Format(format!(
            "no (seed, error) rows in {}",
            path.display()
        )));
    }
    Ok(out)
}

fn stats_table(
    baseline: &PathBuf,
    method: &PathBuf,
    margin: f64,
    resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<Table> {
    let base = read_paired_csv(baseline)?;
    let meth = read_paired_csv(method)?;
    // pair by seed value
    let mut bmap = std::collections::BTreeMap::new();
    for (s, e) in base {
        bmap.insert(s.to_bits(), (s, e));
    }
    let mut pairs: Vec<(f64, f64, f64)> = Vec::new();
    for (s, e) in meth {
        if let Some((sv, be)) = bmap.get(&s.to_bits()) {
            pairs.push((*sv, *be, e));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite seeds"));
    if pairs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need >= 2 seed-paired rows, got {}",
            pairs.len()
        )));
    }
    let a: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let b: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    let s = PairedSamples::new(a, b)?;
    let (improvement, lo, hi) = bootstrap_improvement_ci(&s, resamples, confidence, seed)?;
    let tost = tost_equivalence(&s, margin)?;
    let d = cohens_d(&s)?;
    let (t, p) = paired_t_test(&s)?;
    let rows = vec![
        vec![Value::String("n_pairs".into()), Value::from(s.len())],
        vec![
            Value::String("baseline_mean".into()),
            fnum(mean_of(s.baseline())),
        ],
        vec![
            Value::String("method_mean".into()),
            fnum(mean_of(s.method())),
        ],
        vec![Value::String("improvement".into()), fnum(improvement)],
        vec![Value::String("improvement_ci_lo".into()), fnum(lo)],
        vec![Value::String("improvement_ci_hi".into()), fnum(hi)],
        vec![Value::String("mean_diff".into()), fnum(tost.mean_diff)],
        vec![Value::String("diff_ci90_lo".into()), fnum(tost.ci90.0)],
        vec![Value::String("diff_ci90_hi".into()), fnum(tost.ci90.1)],
        vec![Value::String("tost_p".into()), fnum(tost.p_value)],
        vec![
            Value::String("equivalent".into()),
            Value::from(tost.equivalent),
        ],
        vec![Value::String("cohens_d".into()), fnum(d.d)],
        vec![
            Value::String("cohens_d_degenerate".into()),
            Value::from(d.degenerate),
        ],
        vec![Value::String("t_statistic".into()), fnum(t)],
        vec![Value::String("p_two_sided".into()), fnum(p)],
    ];
    Ok(Table {
        columns: vec!["metric", "value"],
        rows,
        summary: vec![
            ("ci_method".into(), Value::String("percentile".into())),
            ("equivalence_margin".into(), fnum(margin)),
        ],
    })
}

fn mean_of(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn affine_spec(
    method: NormMethod,
    epsilon: f64,
    gamma: Option<Vec<f64>>,
    beta: Option<Vec<f64>>,
    channels: usize,
) -> Result<NormSpec> {
    let mut spec = NormSpec::new(method).with_epsilon(epsilon);
    if gamma.is_some() || beta.is_some() {
        let g = gamma.unwrap_or_else(|| vec![1.0; channels]);
        let b = beta.unwrap_or_else(|| vec![0.0; channels]);
        spec = spec.with_affine(g, b);
    }
    Ok(spec)
}

fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Sample {
            field,
            grid,
            channels,
        } => {
            let f = FieldId::parse(field)?;
            let g = grid.build()?;
            let x = sample_field(&f, &g, *channels)?;
            let out = cli.output.as_ref().ok_or_else(|| {
                Error::InvalidArgument(
                    "sample writes a binary field file; --output is required".into(),
                )
            })?;
            write_field_path(out, &x)?;
            let config = base_config(
                cli,
                "sample",
                json!({"field": field, "grid": grid.describe(), "channels": channels}),
            );
            println!("{config}");
            Ok(0)
        }
        Command::Weights { rule, grid } => {
            let g = grid.build()?;
            let table = weights_table(rule, &g)?;
            let config = base_config(
                cli,
                "weights",
                json!({"rule": rule, "grid": grid.describe()}),
            );
            write_output(&cli.output, &render(cli.format, &config, &table))?;
            Ok(0)
        }
        Command::Moments {
            input,
            rule,
            pattern,
            alpha,
        } => {
            let table = moments_table(input, rule, pattern, *alpha)?;
            let config = base_config(
                cli,
                "moments",
                json!({"input": input, "rule": rule, "pattern": pattern, "alpha": alpha}),
            );
            write_output(&cli.output, &render(cli.format, &config, &table))?;
            Ok(0)
        }
        Command::Normalize {
            input,
            method,
            epsilon,
            gamma,
            beta,
        } => {
            let x = read_field_path(input)?;
            let m = NormMethod::parse(method)?;
            let spec = affine_spec(m, *epsilon, gamma.clone(), beta.clone(), x.channels())?;
            let y = forward(&x, &spec)?;
            let out = cli.output.as_ref().ok_or_else(|| {
                Error::InvalidArgument(
                    "normalize writes a binary field file; --output is required".into(),
                )
            })?;
            write_field_path(out, &y)?;
            let config = base_config(
                cli,
                "normalize",
                json!({"input": input, "method": method, "epsilon": epsilon,
                       "gamma": gamma, "beta": beta}),
            );
            println!("{config}");
            Ok(0)
        }
        Command::Resample {
            input,
            target_n,
            method,
        } => {
            let x = read_field_path(input)?;
            let m = InterpMethod::parse(method)?;
            let target = match x.grid().is_fully_periodic() {
                true => periodic_grid(target_n)?,
                false => uniform_grid(target_n)?,
            };
            let y = interpolate(&x, &target, m)?;
            let out = cli.output.as_ref().ok_or_else(|| {
                Error::InvalidArgument(
                    "resample writes a binary field file; --output is required".into(),
                )
            })?;
            write_field_path(out, &y)?;
            let config = base_config(
                cli,
                "resample",
                json!({"input": input, "target_n": target_n, "method": method,
                       "boundary": "quadratic-extrapolated ghosts"}),
            );
            println!("{config}");
            Ok(0)
        }
        Command::Consistency {
            field,
            rule,
            pattern,
            ladder,
            dim,
        } => {
            let table = consistency_table(field, rule, pattern, ladder, *dim)?;
            let config = base_config(
                cli,
                "consistency",
                json!({"field": field, "rule": rule, "pattern": pattern,
                       "ladder": ladder, "dim": dim}),
            );
            write_output(&cli.output, &render(cli.format, &config, &table))?;
            Ok(0)
        }
        Command::Opsim { experiment } => {
            let (table, config) = match experiment {
                OpsimCommand::Gap {
                    field,
                    source_n,
                    targets,
                    stack,
                } => {
                    let f = FieldId::parse(field)?;
                    let dim = f.dim().unwrap_or(2);
                    let template = stack.template(dim, cli.seed)?;
                    let methods = stack.parse_methods()?;
                    let report =
                        gap_scaling_experiment(&template, &methods, &f, *source_n, targets)?;
                    let config = base_config(
                        cli,
                        "opsim gap",
                        json!({"field": field, "source_n": source_n, "targets": targets,
                               "stack": stack.describe()}),
                    );
                    (scaling_table(&report), config)
                }
                OpsimCommand::Depth {
                    field,
                    source_n,
                    target_n,
                    depths,
                    stack,
                } => {
                    let f = FieldId::parse(field)?;
                    let dim = f.dim().unwrap_or(2);
                    let template = stack.template(dim, cli.seed)?;
                    let methods = stack.parse_methods()?;
                    let report = depth_scaling_experiment(
                        &template, &methods, depths, &f, *source_n, *target_n,
                    )?;
                    let config = base_config(
                        cli,
                        "opsim depth",
                        json!({"field": field, "source_n": source_n, "target_n": target_n,
                               "depths": depths, "stack": stack.describe()}),
                    );
                    (scaling_table(&report), config)
                }
            };
            write_output(&cli.output, &render(cli.format, &config, &table))?;
            Ok(0)
        }
        Command::Meshbias {
            field,
            family,
            strengths,
            n,
        } => {
            let table = meshbias_table(field, family, strengths, *n)?;
            let config = base_config(
                cli,
                "meshbias",
                json!({"field": field, "family": family, "strengths": strengths, "n": n}),
            );
            write_output(&cli.output, &render(cli.format, &config, &table))?;
            Ok(0)
        }
        Command::Stats {
            baseline,
            method,
            margin,
            resamples,
            confidence,
        } => {
            let table = stats_table(baseline, method, *margin, *resamples, *confidence, cli.seed)?;
            let config = base_config(
                cli,
                "stats",
                json!({"baseline": baseline, "method": method, "margin": margin,
                       "resamples": resamples, "confidence": confidence}),
            );
            write_output(&cli.output, &render(cli.format, &config, &table))?;
            Ok(0)
        }
        Command::VerifyAll => {
            let report = crate::verify::run_all(cli.seed);
            for r in &report.results {
                println!(
                    "[{}] criterion {:>2} {} ({:.2}s): {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.id,
                    r.name,
                    r.seconds,
                    r.details
                );
            }
            match &cli.output {
                Some(p) => std::fs::write(p, &report.csv)?,
                None => print!("{}", report.csv),
            }
            Ok(if report.all_passed() { 0 } else { 1 })
        }
    }
}

/// Entry point used by the `qnk` binary; returns the process exit code
/// (0 success, 1 acceptance/runtime failure, 2 usage error).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let body = || match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_)
                | Error::UnknownField(_)
                | Error::InvalidGrid(_)
                | Error::RuleIncompatible(_) => 2,
                _ => 1,
            }
        }
    };
    match thread_cap() {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map(|pool| pool.install(body))
            .unwrap_or_else(|_| body()),
        None => body(),
    }
}

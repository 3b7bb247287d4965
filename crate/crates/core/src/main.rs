use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use itertools::iproduct;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use tracial::algebra::json::{element_to_json, AlgebraJson, ElementJson, InclusionJson, MatrixJson};
use tracial::algebra::random::substream;
use tracial::algebra::{json as ajson, BallSpec, TracialAlgebra, Tuple};
use tracial::closure::{acl_finite, automorphism_fixed_oracle, dcl_finite};
use tracial::convex::{
    gradient_fd_check, gradient_lipschitz_check, gradient_range_check, lasry_lions, quadratic_expansion_check,
    sandwich_check, semiconcavity_check, semiconvexity_check, envelope_gradient, CheckReport, ExprJson,
    RegularizationParams, SolverOptions,
};
use tracial::duality::{
    admissibility_check, build_dual_pair, definable_realization_demo, displacement_interpolation_check,
    extend_global, gap_at, sample_selfadjoint_points,
};
use tracial::report::{num, write_outputs, Code, Report, Table, OUT_DIR_ENV};
use tracial::suite::{certified_t, run_criterion, SuiteConfig, CRITERIA};
use tracial::transport::{assignment_oracle, rearrangement_cost, wasserstein, OrbitType, TransportOptions, ORACLE_MAX_N};
use tracial::{Error, Result};

/// Numerical optimal transport and definable closures on finite-dimensional
/// tracial *-algebras.
#[derive(Parser, Serialize)]
#[command(name = "tracial", version)]
struct Cli {
    /// Seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Random restarts of the orbit optimizer.
    #[arg(long, global = true, default_value_t = 20)]
    restarts: usize,
    /// Gradient tolerance of the orbit optimizer and the inner solvers.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Directory for reports.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "tracial-out")]
    #[serde(skip)]
    out_dir: PathBuf,
    #[command(subcommand)]
    #[serde(flatten)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
enum Command {
    /// Definable closure of an inclusion, checked against sampled automorphisms.
    Dcl {
        #[arg(long)]
        instance: PathBuf,
        /// Automorphisms sampled by the oracle.
        #[arg(long, default_value_t = 128)]
        samples: usize,
        /// Also write the closure basis as `dcl.basis.csv`.
        #[arg(long)]
        basis: bool,
    },
    /// Optimal coupling cost and Wasserstein distance of two tuples.
    Transport {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Double-envelope regularization of a predicate with sampled checks.
    Regularize {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long = "R")]
        #[serde(rename = "R")]
        big_r: Option<f64>,
        /// Target accuracy; picks the largest t whose error bound is below it.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Dual potentials, admissibility and the duality gap.
    Duality {
        #[arg(long)]
        instance: PathBuf,
        /// Side of the admissibility grid (pairs = grid²).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Generated-algebra dimensions along a coupling.
    Interpolate {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Recovery of an element of W*(a) as an envelope gradient.
    Realize {
        #[arg(long)]
        instance: PathBuf,
    },
    /// The acceptance experiments.
    Checks {
        /// `all` or a comma-separated list of criterion numbers.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Multiplier on instance counts.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Dcl { .. } => "dcl",
            Command::Transport { .. } => "transport",
            Command::Regularize { .. } => "regularize",
            Command::Duality { .. } => "duality",
            Command::Interpolate { .. } => "interpolate",
            Command::Realize { .. } => "realize",
            Command::Checks { .. } => "checks",
        }
    }
}

/// Output tables of one run: the summary first, then named extras.
type Tables = Vec<(&'static str, Table)>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let command = cli.command.name();
    let config = serde_json::to_value(&cli).expect("config serializes");
    let mut report = Report::new(command, config, cli.seed);
    let tables = match dispatch(&cli, &mut report) {
        Ok(t) => t,
        Err(e) => {
            report.flag_error(None, &e);
            Vec::new()
        }
    };
    for d in &report.diagnostics {
        let at = d.instance.as_deref().map(|i| format!(" [{i}]")).unwrap_or_default();
        eprintln!("{}{at}: {}", d.code.as_str(), d.message);
    }
    let refs: Vec<(&str, &Table)> = tables.iter().map(|(s, t)| (*s, t)).collect();
    let wall = start.elapsed();
    match write_outputs(&cli.out_dir, &report, &refs, wall) {
        Ok(w) => eprintln!(
            "{command}: {} in {:.2}s, report {}",
            if report.passed { "pass" } else { "flagged" },
            wall.as_secs_f64(),
            w.report.display()
        ),
        Err(e) => {
            eprintln!("{}: {e}", Code::Io.as_str());
            return ExitCode::from(1);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}

fn dispatch(cli: &Cli, report: &mut Report) -> Result<Tables> {
    let transport = TransportOptions {
        restarts: cli.restarts,
        tol: cli.tol,
        seed: cli.seed,
        ..Default::default()
    };
    let solver = SolverOptions {
        tol: cli.tol,
        seed: cli.seed,
        ..Default::default()
    };
    match &cli.command {
        Command::Dcl {
            instance,
            samples,
            basis,
        } => run_dcl(&load(instance)?, *samples, *basis, cli.seed, report),
        Command::Transport { instance } => run_transport(&load(instance)?, &transport, report),
        Command::Regularize {
            instance,
            t,
            r,
            big_r,
            eps,
            samples,
        } => {
            let flags = RegularizeFlags {
                t: *t,
                r: *r,
                big_r: *big_r,
                eps: *eps,
                samples: *samples,
            };
            run_regularize(&load(instance)?, &flags, solver, cli.seed, report)
        }
        Command::Duality { instance, grid } => run_duality(&load(instance)?, *grid, &transport, solver, cli.seed, report),
        Command::Interpolate { instance } => run_interpolate(&load(instance)?, &transport, report),
        Command::Realize { instance } => run_realize(&load(instance)?, solver, report),
        Command::Checks { suite, scale } => run_checks(suite, *scale, cli, report),
    }
}

/// An instance file holds one object or an array of them.
fn load(path: &Path) -> Result<Vec<Value>> {
    let text = fs::read_to_string(path)?;
    Ok(match serde_json::from_str(&text)? {
        Value::Array(items) => items,
        v => vec![v],
    })
}

/// Parses each instance, recording failures against its id and skipping it.
fn each<T: DeserializeOwned>(
    items: &[Value],
    report: &mut Report,
    mut run: impl FnMut(&str, T, &mut Report) -> Result<()>,
) -> Result<()> {
    for (i, item) in items.iter().enumerate() {
        let id = item
            .get("id")
            .and_then(Value::as_str)
            .map(str::to_string)
            .unwrap_or_else(|| i.to_string());
        let outcome = serde_json::from_value::<T>(item.clone())
            .map_err(Error::from)
            .and_then(|inst| run(&id, inst, report));
        if let Err(e) = outcome {
            report.flag_error(Some(&id), &e);
        }
    }
    Ok(())
}

/// Tuples are arrays of elements. With an explicit algebra each element is
/// a list of block matrices; without one each element is a single matrix
/// and the algebra is `M_n`.
fn parse_tuple(algebra: &Option<AlgebraJson>, entries: &[Value]) -> Result<Tuple> {
    if entries.is_empty() {
        return Err(Error::Input("a tuple needs at least one entry".into()));
    }
    match algebra {
        Some(a) => {
            let alg = a.build()?;
            let e: Vec<ElementJson> = entries.iter().map(|v| serde_json::from_value(v.clone())).collect::<std::result::Result<_, _>>()?;
            ajson::tuple_from_json(&alg, &e)
        }
        None => {
            let m: Vec<MatrixJson> = entries.iter().map(|v| serde_json::from_value(v.clone())).collect::<std::result::Result<_, _>>()?;
            let alg = TracialAlgebra::matrix(m[0].len())?;
            ajson::factor_tuple_from_json(&alg, &m)
        }
    }
}

fn same_algebra(x: &Tuple, y: &Tuple) -> Result<()> {
    if x.compatible(y) {
        Ok(())
    } else {
        Err(Error::Shape("x and y must have the same arity and algebra".into()))
    }
}

fn flag_check(report: &mut Report, id: &str, c: &CheckReport) {
    if c.unconverged > 0 {
        report.flag(
            Code::NumericUnconverged,
            Some(id),
            format!("{}: {} unconverged evaluations", c.name, c.unconverged),
        );
    }
    if !c.passed {
        report.flag(
            Code::NumericCheckFailed,
            Some(id),
            format!("{}: violation {:e} above {:e}", c.name, c.max_violation, c.tolerance),
        );
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DclInstance {
    #[serde(default)]
    #[allow(dead_code)]
    id: Option<String>,
    sub: AlgebraJson,
    amb: AlgebraJson,
    mult: Vec<Vec<u32>>,
}

const DCL_AGREEMENT_TOL: f64 = 1e-8;

fn run_dcl(items: &[Value], samples: usize, with_basis: bool, seed: u64, report: &mut Report) -> Result<Tables> {
    let mut summary = Table::new(&["id", "sub_dim", "amb_dim", "dcl_dim", "acl_dim", "oracle_dim", "agreement"]);
    let mut basis = Table::new(&["id", "element", "block", "row", "col", "re", "im"]);
    each(items, report, |id, inst: DclInstance, report| {
        let inc = InclusionJson {
            sub: inst.sub,
            amb: inst.amb,
            mult: inst.mult,
        }
        .build()?;
        let dcl = dcl_finite(&inc);
        let acl = acl_finite(&inc);
        let oracle = automorphism_fixed_oracle(&inc, samples, seed);
        let residual = dcl
            .algebra
            .containment_residual(&oracle.fixed)
            .max(oracle.fixed.containment_residual(&dcl.algebra));
        let agreement = dcl.dim == oracle.fixed.dim() && residual <= DCL_AGREEMENT_TOL;
        if !agreement {
            report.flag(
                Code::NumericCheckFailed,
                Some(id),
                format!("dcl dim {} vs oracle dim {} (residual {residual:e})", dcl.dim, oracle.fixed.dim()),
            );
        }
        report.push(json!({
            "id": id,
            "sub_dim": inc.sub().dim(),
            "amb_dim": inc.amb().dim(),
            "dcl_dim": dcl.dim,
            "acl_dim": acl.dim(),
            "classes": dcl.partition.classes,
            "oracle_dim": oracle.fixed.dim(),
            "oracle_dims": oracle.dims,
            "containment_residual": residual,
            "agreement": agreement,
        }))?;
        summary.row(vec![
            id.into(),
            inc.sub().dim().to_string(),
            inc.amb().dim().to_string(),
            dcl.dim.to_string(),
            acl.dim().to_string(),
            oracle.fixed.dim().to_string(),
            agreement.to_string(),
        ]);
        if with_basis {
            for (k, e) in dcl.algebra.basis().iter().enumerate() {
                for (j, m) in e.blocks().iter().enumerate() {
                    for (r, c) in iproduct!(0..m.nrows(), 0..m.ncols()) {
                        let z = m[(r, c)];
                        basis.row(vec![
                            id.into(),
                            k.to_string(),
                            j.to_string(),
                            r.to_string(),
                            c.to_string(),
                            num(z.re),
                            num(z.im),
                        ]);
                    }
                }
            }
        }
        Ok(())
    })?;
    let mut tables = vec![("", summary)];
    if with_basis {
        tables.push(("basis", basis));
    }
    Ok(tables)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairInstance {
    #[serde(default)]
    #[allow(dead_code)]
    id: Option<String>,
    #[serde(default)]
    algebra: Option<AlgebraJson>,
    x: Vec<Value>,
    y: Vec<Value>,
}

impl PairInstance {
    fn tuples(&self) -> Result<(Tuple, Tuple)> {
        let x = parse_tuple(&self.algebra, &self.x)?;
        let y = parse_tuple(&self.algebra, &self.y)?;
        same_algebra(&x, &y)?;
        Ok((x, y))
    }
}

const ORACLE_TOL: f64 = 1e-6;

/// Exact optimum when `x` and `y` are single Hermitian matrices.
fn commuting_oracle(x: &Tuple, y: &Tuple) -> Option<Result<(f64, Option<f64>)>> {
    let (a, b) = (x.entry(0), y.entry(0));
    if x.arity() != 1 || !x.algebra().is_factor() || !a.is_self_adjoint(1e-12) || !b.is_self_adjoint(1e-12) {
        return None;
    }
    Some(if x.algebra().block_dim(0) <= ORACLE_MAX_N {
        assignment_oracle(a, b).map(|o| (o.sorted, Some(o.brute_force)))
    } else {
        Ok((rearrangement_cost(a.block(0), b.block(0)), None))
    })
}

fn run_transport(items: &[Value], opts: &TransportOptions, report: &mut Report) -> Result<Tables> {
    let mut summary = Table::new(&["id", "C", "d", "raw_d2", "converged", "oracle_C"]);
    each(items, report, |id, inst: PairInstance, report| {
        let (x, y) = inst.tuples()?;
        let w = wasserstein(&x, &y, opts)?;
        let oracle = commuting_oracle(&x, &y).transpose()?;
        if !w.cost.converged {
            report.flag(Code::NumericUnconverged, Some(id), "orbit optimizer did not converge; C is a lower bound");
        }
        if let Some((sorted, _)) = oracle {
            if (w.cost.value - sorted).abs() > ORACLE_TOL {
                report.flag(
                    Code::NumericCheckFailed,
                    Some(id),
                    format!("C = {} differs from the oracle {sorted}", w.cost.value),
                );
            }
        }
        report.push(json!({
            "id": id,
            "C": w.cost.value,
            "d": w.d,
            "raw_d2": w.raw_d2,
            "converged": w.cost.converged,
            "grad_norm": w.cost.grad_norm,
            "restarts_converged": w.cost.restarts_converged,
            "best_restart": w.cost.best_restart,
            "aligner": element_to_json(&w.cost.aligner),
            "oracle": oracle.map(|(s, b)| json!({"sorted": s, "brute_force": b})),
        }))?;
        summary.row(vec![
            id.into(),
            num(w.cost.value),
            num(w.d),
            num(w.raw_d2),
            w.cost.converged.to_string(),
            oracle.map(|(s, _)| num(s)).unwrap_or_default(),
        ]);
        Ok(())
    })?;
    Ok(vec![("", summary)])
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegularizeInstance {
    #[serde(default)]
    #[allow(dead_code)]
    id: Option<String>,
    algebra: AlgebraJson,
    arity: usize,
    predicate: ExprJson,
    t: Option<f64>,
    r: Option<f64>,
    #[serde(rename = "R")]
    big_r: Option<f64>,
    eps: Option<f64>,
    samples: Option<usize>,
}

struct RegularizeFlags {
    t: Option<f64>,
    r: Option<f64>,
    big_r: Option<f64>,
    eps: Option<f64>,
    samples: Option<usize>,
}

const DEFAULT_CHECK_SAMPLES: usize = 20;

fn run_regularize(items: &[Value], flags: &RegularizeFlags, solver: SolverOptions, seed: u64, report: &mut Report) -> Result<Tables> {
    let mut summary = Table::new(&["id", "check", "samples", "max_violation", "tolerance", "unconverged", "passed"]);
    let mut index = 0u64;
    each(items, report, |id, inst: RegularizeInstance, report| {
        index += 1;
        let alg = inst.algebra.build()?;
        let phi = Arc::new(inst.predicate.build(inst.arity, &alg, solver)?);
        let r = flags
            .r
            .or(inst.r)
            .ok_or_else(|| Error::Input("missing outer radius r".into()))?;
        let big_r = flags.big_r.or(inst.big_r).unwrap_or(r);
        let outer = BallSpec::uniform(inst.arity, r)?;
        let inner = BallSpec::uniform(inst.arity, big_r)?;
        let t = match (flags.t.or(inst.t), flags.eps.or(inst.eps)) {
            (Some(t), _) => t,
            (None, Some(eps)) => RegularizationParams::t_for_accuracy(phi.as_ref(), &outer, &inner, eps)?,
            (None, None) => certified_t(phi.as_ref(), &inner),
        };
        let params = RegularizationParams::new(t, outer.clone(), inner.clone())?;
        let psi = lasry_lions(phi.clone(), &params, solver)?;
        let samples = flags.samples.or(inst.samples).unwrap_or(DEFAULT_CHECK_SAMPLES);
        let mut rng = substream(seed, index);
        let c = 1.0 / t;
        let grad = |x: &Tuple| envelope_gradient(&psi, x).grad;
        let points: Vec<Tuple> = (0..samples)
            .map(|_| tracial::algebra::random::random_in_ball(&alg, &outer, &mut rng))
            .collect();
        let mut checks = vec![
            semiconvexity_check(&psi, c, &alg, &outer, samples, 1e-8, &mut rng),
            semiconcavity_check(&psi, c, &alg, &outer, samples, 1e-8, &mut rng),
            gradient_fd_check(&psi, &grad, &points, 1e-4),
            quadratic_expansion_check(&psi, &grad, c, &alg, &outer, samples, 1e-8, &mut rng),
            gradient_lipschitz_check(&grad, c, &alg, &outer, samples, 1e-6, &mut rng),
            gradient_range_check(&psi, &inner, &alg, samples, 1e-6, &mut rng),
        ];
        let sandwich = params.sandwich(phi.as_ref());
        if let Some((lo, hi)) = sandwich {
            checks.push(sandwich_check(&psi, phi.as_ref(), lo, hi, &alg, &outer, samples, 0.0, &mut rng));
        }
        for ch in &checks {
            flag_check(report, id, ch);
            summary.row(vec![
                id.into(),
                ch.name.clone(),
                ch.samples.to_string(),
                num(ch.max_violation),
                num(ch.tolerance),
                ch.unconverged.to_string(),
                ch.passed.to_string(),
            ]);
        }
        report.push(json!({
            "id": id,
            "t": t,
            "r": r,
            "R": big_r,
            "sandwich": sandwich.map(|(lo, hi)| [lo, hi]),
            "checks": checks,
        }))?;
        Ok(())
    })?;
    Ok(vec![("", summary)])
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DualityInstance {
    #[serde(default)]
    #[allow(dead_code)]
    id: Option<String>,
    #[serde(default)]
    algebra: Option<AlgebraJson>,
    x: Vec<Value>,
    y: Vec<Value>,
    r: Option<f64>,
}

const GAP_TOL: f64 = 1e-5;
const ADMISSIBILITY_TOL: f64 = 1e-6;

fn run_duality(
    items: &[Value],
    grid: Option<usize>,
    transport: &TransportOptions,
    solver: SolverOptions,
    seed: u64,
    report: &mut Report,
) -> Result<Tables> {
    let mut summary = Table::new(&["id", "r", "C", "d", "gap", "min_margin", "pairs", "closed_form", "passed"]);
    let mut index = 0u64;
    each(items, report, |id, inst: DualityInstance, report| {
        index += 1;
        let x = parse_tuple(&inst.algebra, &inst.x)?;
        let y = parse_tuple(&inst.algebra, &inst.y)?;
        same_algebra(&x, &y)?;
        let r = inst
            .r
            .unwrap_or_else(|| x.op_norms().into_iter().chain(y.op_norms()).fold(0.0, f64::max))
            .max(f64::MIN_POSITIVE);
        let ball = BallSpec::uniform(x.arity(), r)?;
        if !ball.contains(&y) {
            return Err(Error::Precondition("y lies outside the ball".into()));
        }
        let pair = build_dual_pair(&OrbitType::with_ball(x.clone(), ball.clone())?, &ball, transport.clone(), solver)?;
        let (phi, psi) = extend_global(pair.phi0.clone(), pair.psi1.clone(), &ball)?;
        let w = wasserstein(&x, &y, transport)?;
        let gap = gap_at(&x, &w.coupling.y_aligned, w.cost.value, w.cost.converged, &phi, &psi);
        let side = grid.unwrap_or(if pair.closed_form() { 100 } else { 10 });
        let mut rng = substream(seed, index);
        let xs = sample_selfadjoint_points(x.algebra(), &ball, 3.0, side, &mut rng);
        let ys = sample_selfadjoint_points(x.algebra(), &ball, 3.0, side, &mut rng);
        let adm = admissibility_check(&phi, &psi, &xs, &ys, &ball, ADMISSIBILITY_TOL);
        let gap_ok = gap.gap <= GAP_TOL && gap.gap >= -ADMISSIBILITY_TOL;
        if !w.cost.converged || !gap.potentials_converged || adm.unconverged > 0 {
            report.flag(Code::NumericUnconverged, Some(id), "an optimizer did not converge; values are bounds");
        }
        if !gap_ok {
            report.flag(Code::NumericCheckFailed, Some(id), format!("duality gap {:e}", gap.gap));
        }
        if !adm.passed {
            report.flag(
                Code::NumericCheckFailed,
                Some(id),
                format!("admissibility margin {:e}", adm.min_margin),
            );
        }
        let passed = gap_ok && adm.passed;
        summary.row(vec![
            id.into(),
            num(r),
            num(w.cost.value),
            num(w.d),
            num(gap.gap),
            num(adm.min_margin),
            adm.pairs.to_string(),
            pair.closed_form().to_string(),
            passed.to_string(),
        ]);
        report.push(json!({
            "id": id,
            "r": r,
            "C": w.cost.value,
            "d": w.d,
            "converged": w.cost.converged,
            "closed_form": pair.closed_form(),
            "gap": gap,
            "admissibility": adm,
            "passed": passed,
        }))?;
        Ok(())
    })?;
    Ok(vec![("", summary)])
}

#[derive(Deserialize, Serialize, Default, Clone, Copy, PartialEq)]
#[serde(rename_all = "lowercase")]
enum Align {
    #[default]
    Optimal,
    Given,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InterpolateInstance {
    #[serde(default)]
    #[allow(dead_code)]
    id: Option<String>,
    #[serde(default)]
    algebra: Option<AlgebraJson>,
    x: Vec<Value>,
    y: Vec<Value>,
    t: f64,
    #[serde(default)]
    align: Align,
}

fn run_interpolate(items: &[Value], transport: &TransportOptions, report: &mut Report) -> Result<Tables> {
    let mut summary = Table::new(&["id", "t", "align", "dim_midpoint", "dim_pair", "equal", "contained"]);
    each(items, report, |id, inst: InterpolateInstance, report| {
        let x = parse_tuple(&inst.algebra, &inst.x)?;
        let y = parse_tuple(&inst.algebra, &inst.y)?;
        same_algebra(&x, &y)?;
        let (y_aligned, cost) = match inst.align {
            Align::Given => (y, None),
            Align::Optimal => {
                let w = wasserstein(&x, &y, transport)?;
                if !w.cost.converged {
                    report.flag(Code::NumericUnconverged, Some(id), "orbit optimizer did not converge");
                }
                (w.coupling.y_aligned, Some((w.cost.value, w.cost.converged)))
            }
        };
        let rep = displacement_interpolation_check(&x, &y_aligned, inst.t)?;
        if !rep.contained {
            report.flag(
                Code::NumericCheckFailed,
                Some(id),
                "the midpoint algebra is not contained in the pair algebra",
            );
        }
        summary.row(vec![
            id.into(),
            num(inst.t),
            serde_json::to_value(inst.align)?.as_str().unwrap_or_default().into(),
            rep.dim_midpoint.to_string(),
            rep.dim_pair.to_string(),
            rep.equal.to_string(),
            rep.contained.to_string(),
        ]);
        report.push(json!({
            "id": id,
            "align": inst.align,
            "C": cost.map(|c| c.0),
            "converged": cost.map(|c| c.1),
            "interpolation": rep,
        }))?;
        Ok(())
    })?;
    Ok(vec![("", summary)])
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RealizeInstance {
    #[serde(default)]
    #[allow(dead_code)]
    id: Option<String>,
    #[serde(default)]
    algebra: Option<AlgebraJson>,
    a: Vec<Value>,
    z: Value,
    t: f64,
    r: f64,
}

fn run_realize(items: &[Value], solver: SolverOptions, report: &mut Report) -> Result<Tables> {
    let mut summary = Table::new(&["id", "t", "r", "gate", "error", "interior", "converged", "passed"]);
    each(items, report, |id, inst: RealizeInstance, report| {
        let a = parse_tuple(&inst.algebra, &inst.a)?;
        let z = parse_tuple(&inst.algebra, std::slice::from_ref(&inst.z))?;
        // Rejects z from a different algebra.
        a.concat(&z)?;
        let rep = definable_realization_demo(&a, &z, inst.t, inst.r, solver)?;
        if !rep.converged {
            report.flag(Code::NumericUnconverged, Some(id), "envelope solve did not converge");
        }
        if !rep.passed {
            report.flag(Code::NumericCheckFailed, Some(id), format!("recovery error {:e}", rep.error));
        }
        summary.row(vec![
            id.into(),
            num(rep.t),
            num(rep.r),
            num(rep.gate),
            num(rep.error),
            rep.interior.to_string(),
            rep.converged.to_string(),
            rep.passed.to_string(),
        ]);
        let mut v = serde_json::to_value(&rep)?;
        v["id"] = json!(id);
        report.push(v)?;
        Ok(())
    })?;
    Ok(vec![("", summary)])
}

fn parse_suite(s: &str) -> Result<Vec<u8>> {
    if s.trim() == "all" {
        return Ok(CRITERIA.to_vec());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<u8>()
                .ok()
                .filter(|id| CRITERIA.contains(id))
                .ok_or_else(|| Error::Input(format!("bad suite entry {p:?}; expected all or numbers 1 to 8")))
        })
        .collect()
}

fn run_checks(suite: &str, scale: f64, cli: &Cli, report: &mut Report) -> Result<Tables> {
    if !(scale > 0.0) {
        return Err(Error::Input("scale must be positive".into()));
    }
    let cfg = SuiteConfig {
        seed: cli.seed,
        restarts: cli.restarts,
        scale,
    };
    let mut summary = Table::new(&["criterion", "name", "measure", "value", "relation", "limit", "passed"]);
    for id in parse_suite(suite)? {
        let res = run_criterion(id, &cfg)?;
        println!("{}", res.line());
        for m in &res.measures {
            summary.row(vec![
                id.to_string(),
                res.name.into(),
                m.name.clone(),
                num(m.value),
                m.relation.to_string(),
                num(m.limit),
                m.passed.to_string(),
            ]);
            if !m.passed {
                let code = if m.name == "unconverged" {
                    Code::NumericUnconverged
                } else {
                    Code::NumericCheckFailed
                };
                report.flag(
                    code,
                    Some(&format!("criterion {id}")),
                    format!("{} = {:e}, limit {} {:e}", m.name, m.value, m.relation, m.limit),
                );
            }
        }
        report.push(&res)?;
    }
    Ok(vec![("", summary)])
}

//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for input
//! errors. Certificates are JSON; CSV and SVG come from `simulate` and
//! `portrait`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::contraction::{
    check_contraction_identity, closed_loop_field, synthesize_controller, ClosedLoop, Controller, Method,
};
use crate::eigen::{check_left_eigenpair, check_right_eigenpair, EigenPair, Side};
use crate::error::{Error, Result};
use crate::expr::{is_zero, simplify, ZeroTestPolicy};
use crate::field::CMatrix;
use crate::grid::Grid;
use crate::model::Model;
use crate::riccati::{
    build_hamiltonian, check_closedloop_spectrum, check_gram_symmetry, check_invariance, check_j_skew,
    check_lyapunov_relation, check_psd_on_grid, check_regularity_witness_u, check_regularity_witness_v,
    dre_residual, imaginary_axis_margin, reflect_pair, solve_from_subspace, Definiteness,
};
use crate::sim::{integrate, phase_portrait, portrait_svg, trajectories_csv, Dynamics};
use crate::verdict::Verdict;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "drekit",
    version,
    about = "Verify differential Riccati equations, nonlinear eigenpairs and contraction controllers",
    after_help = "Portrait SVGs are 600x600, fitted to the data with a 5% margin; axes are drawn through the origin, \
                  trajectories as blue polylines with red start dots."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Symmetry, DRE residual and grid positivity of the model's X.
    VerifyDre(Opts),
    /// Verify the model's eigenpairs against its Hamiltonian.
    Eig(Opts),
    /// Build X = V U^-1 from the model's U, V and run the structural checks.
    Solve(Opts),
    /// Synthesize the contraction controller k with u = -k.
    Synthesize(Opts),
    /// Integrate the closed loop from --x0 and write CSV.
    Simulate(Opts),
    /// Integrate the closed loop from every --grid point and write CSV (and SVG with --out).
    Portrait(Opts),
}

#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// Model file (JSON).
    pub model: PathBuf,
    /// Seed for randomized zero tests.
    #[arg(long, env = "DREKIT_SEED")]
    pub seed: Option<u64>,
    /// Sample points per zero test.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Absolute tolerance of sampled zero tests
    #[arg(long)]
    pub tol_abs: Option<f64>,
    /// Relative tolerance of sampled zero tests
    #[arg(long)]
    pub tol_rel: Option<f64>,
    /// Grid "xmin,xmax,steps;ymin,ymax,steps", steps counting points per axis.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// End time of integration.
    #[arg(long)]
    pub t1: Option<f64>,
    /// RK4 step size.
    #[arg(long)]
    pub h: Option<f64>,
    /// Initial state "v1,v2,...".
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Basis columns (1-based) excluded from the invariance check.
    #[arg(long, value_delimiter = ',')]
    pub skip_columns: Vec<usize>,
    /// Eigenpair to check: 1-based index or "all".
    #[arg(long, default_value = "all")]
    pub pair: String,
}

#[derive(Serialize, Debug)]
pub struct Check {
    pub name: String,
    #[serde(flatten)]
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

#[derive(Serialize, Debug)]
pub struct Certificate {
    pub command: String,
    pub model: String,
    pub pass: bool,
    pub policy: ZeroTestPolicy,
    pub checks: Vec<Check>,
    pub assumptions: Vec<String>,
    pub outputs: BTreeMap<String, Value>,
}

impl Certificate {
    fn new(command: &str, model: &Model, policy: &ZeroTestPolicy) -> Self {
        Self {
            command: command.into(),
            model: model.name.clone(),
            pass: true,
            policy: policy.clone(),
            checks: Vec::new(),
            assumptions: Vec::new(),
            outputs: BTreeMap::new(),
        }
    }

    fn push(&mut self, name: impl Into<String>, verdict: Verdict) {
        self.push_with(name, verdict, None);
    }

    fn push_with(&mut self, name: impl Into<String>, verdict: Verdict, details: Option<Value>) {
        self.pass &= verdict.pass;
        self.checks.push(Check {
            name: name.into(),
            verdict,
            details,
        });
    }

    /// Records a check whose evaluation itself failed (not an input error).
    fn push_error(&mut self, name: impl Into<String>, e: &Error) {
        self.push(name, Verdict::fail(e.to_string()));
    }

    fn output(&mut self, key: &str, v: Value) {
        self.outputs.insert(key.into(), v);
    }
}

/// Whether an error means the input was unusable (exit 2) rather than a
/// failed check (exit 1).
pub fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse(_) | Error::Model(_) | Error::Dimension(_) | Error::Precondition(_) | Error::OpaqueSymbol(_)
    )
}

fn policy_for(model: &Model, o: &Opts) -> Result<ZeroTestPolicy> {
    let mut p = model.policy.clone();
    if let Some(s) = o.seed {
        p.seed = s;
    }
    if let Some(s) = o.samples {
        p.samples = s;
    }
    if let Some(v) = o.tol_abs {
        p.tol_abs = v;
    }
    if let Some(v) = o.tol_rel {
        p.tol_rel = v;
    }
    p.validate()?;
    Ok(p)
}

fn grid_for(model: &Model, o: &Opts, default_steps: usize) -> Result<Grid> {
    match (&o.grid, &model.grid) {
        (Some(g), _) => g.parse(),
        (None, Some(g)) => Ok(g.clone()),
        (None, None) => Ok(Grid::square(model.n, -2.0, 2.0, default_steps)),
    }
}

fn matrix_json(m: &CMatrix) -> Value {
    json!(m.to_rows())
}

fn skip_columns(o: &Opts, n: usize) -> Result<Vec<usize>> {
    o.skip_columns
        .iter()
        .map(|&c| {
            if c == 0 || c > n {
                Err(Error::Model(format!("--skip-columns entry {c} outside 1..{n}")))
            } else {
                Ok(c - 1)
            }
        })
        .collect()
}

fn psd_check(cert: &mut Certificate, x: &CMatrix, grid: &Grid, mode: Definiteness, policy: &ZeroTestPolicy) {
    match check_psd_on_grid(x, grid, mode, policy) {
        Ok(r) => {
            let mut v = if r.pass {
                Verdict::pass()
            } else {
                Verdict::fail(format!("minimum eigenvalue {} at {:?}", r.min_eigenvalue, r.argmin))
            };
            v.points = r.per_point.len();
            v.exact = false;
            let details = json!({
                "mode": r.mode,
                "grid": r.grid,
                "min_eigenvalue": r.min_eigenvalue,
                "argmin": r.argmin,
                "per_point_min_eigenvalue": r.per_point,
            });
            cert.push_with("psd_grid", v, Some(details));
        }
        Err(e) => cert.push_error("psd_grid", &e),
    }
}

fn cmd_verify_dre(model: &Model, o: &Opts, policy: &ZeroTestPolicy) -> Result<Certificate> {
    let mut cert = Certificate::new("verify-dre", model, policy);
    let x = model.x.clone().ok_or_else(|| Error::Model("model has no X".into()))?;
    let d = model.riccati_data(policy)?;
    let sym = Verdict::from(x.sub(&x.transpose())?.is_zero(policy)?);
    let symmetric = sym.pass;
    cert.push("symmetry", sym);
    let residual = dre_residual(&x, &d)?;
    let v = Verdict::from(residual.is_zero(policy)?);
    let details = (!v.pass).then(|| json!({ "residual": matrix_json(&residual) }));
    cert.push_with("dre_residual", v, details);
    let grid = grid_for(model, o, 21)?;
    if symmetric {
        psd_check(&mut cert, &x, &grid, Definiteness::Semidefinite, policy);
    } else {
        cert.push("psd_grid", Verdict::fail("X is not symmetric"));
    }
    Ok(cert)
}

fn selected_pairs(model: &Model, o: &Opts) -> Result<Vec<(usize, EigenPair)>> {
    let all: Vec<(usize, EigenPair)> = model.eigenpairs.iter().cloned().enumerate().collect();
    if o.pair == "all" {
        return Ok(all);
    }
    let k: usize = o
        .pair
        .parse()
        .map_err(|_| Error::Model(format!("--pair expects an index or \"all\", got \"{}\"", o.pair)))?;
    if k == 0 || k > all.len() {
        return Err(Error::Model(format!("--pair {k} outside 1..{}", all.len())));
    }
    Ok(vec![all[k - 1].clone()])
}

fn cmd_eig(model: &Model, o: &Opts, policy: &ZeroTestPolicy) -> Result<Certificate> {
    let mut cert = Certificate::new("eig", model, policy);
    let pairs = selected_pairs(model, o)?;
    if pairs.is_empty() {
        return Ok(cert);
    }
    let d = model.riccati_data(policy)?;
    let h = build_hamiltonian(&d)?;
    cert.push("j_skew", check_j_skew(&h, policy)?);
    for (i, p) in pairs {
        let label = p.label.clone().unwrap_or_else(|| format!("{}", i + 1));
        let v = match p.side {
            Side::Right => check_right_eigenpair(&h, &p, &d.f, policy),
            Side::Left => check_left_eigenpair(&h, &p, &d.f, policy),
        };
        match v {
            Ok(v) => cert.push(format!("eigenpair_{label}"), v),
            Err(e) if !is_input_error(&e) || matches!(e, Error::OpaqueSymbol(_)) => {
                cert.push_error(format!("eigenpair_{label}"), &e)
            }
            Err(e) => return Err(e),
        }
        if p.side == Side::Right {
            let (alpha, v) = reflect_pair(&p.value, &p.vector)?;
            let left = EigenPair::left(alpha, v);
            match check_left_eigenpair(&h, &left, &d.f, policy) {
                Ok(v) => cert.push(format!("reflection_{label}"), v),
                Err(e) => cert.push_error(format!("reflection_{label}"), &e),
            }
        }
    }
    Ok(cert)
}

fn cmd_solve(model: &Model, o: &Opts, policy: &ZeroTestPolicy) -> Result<Certificate> {
    let mut cert = Certificate::new("solve", model, policy);
    let d = model.riccati_data(policy)?;
    let b = model.basis()?;
    let skip = skip_columns(o, model.n)?;
    let h = build_hamiltonian(&d)?;
    match imaginary_axis_margin(&h) {
        Ok(m) => cert.output("imaginary_axis_margin", json!(m)),
        Err(_) => cert
            .assumptions
            .push("Hamiltonian is not constant: no eigenvalues on the imaginary axis is assumed".into()),
    }
    if !skip.is_empty() {
        let cols: Vec<String> = skip.iter().map(|c| (c + 1).to_string()).collect();
        cert.assumptions
            .push(format!("invariance of columns {} taken from the model, not verified", cols.join(",")));
    }
    let solution = match solve_from_subspace(&b, &d, &skip, policy) {
        Ok(s) => s,
        Err(e) if is_input_error(&e) => return Err(e),
        Err(e) => {
            let invariance = check_invariance(&b, &h, &d.f, &skip, policy);
            match invariance {
                Ok(v) if !v.pass => cert.push("invariance", v),
                _ => cert.push_error("solution", &e),
            }
            return Ok(cert);
        }
    };
    cert.push("invariance", solution.invariance.clone());
    cert.push("dre_residual", solution.residual.clone());
    let x = solution.x.simplify();
    cert.output("X", matrix_json(&x));
    if let Some(given) = &model.x {
        cert.push("matches_model_x", x.sub(given)?.is_zero(policy)?.into());
    }
    let gram = check_gram_symmetry(&b, policy)?;
    cert.push("gram_hermitian", gram.hermitian);
    cert.push("gram_symmetric", gram.symmetric);
    if let Some(values) = &b.eigenvalues {
        let pairs: Vec<_> = values
            .iter()
            .cloned()
            .enumerate()
            .filter(|(i, _)| !skip.contains(i))
            .collect();
        match check_closedloop_spectrum(&b, &x, &d, &pairs, policy) {
            Ok(v) => cert.push("closedloop_spectrum", v),
            Err(e) => cert.push_error("closedloop_spectrum", &e),
        }
        if skip.is_empty() {
            match check_lyapunov_relation(&b, &d, policy) {
                Ok(v) => cert.push("lyapunov_relation", v),
                Err(e) => cert.push_error("lyapunov_relation", &e),
            }
        } else {
            cert.assumptions
                .push("Lyapunov relation not checked: it needs every column of the basis".into());
        }
    }
    for (i, (lambda, v)) in model.witnesses_u.iter().enumerate() {
        match check_regularity_witness_u(v, lambda, &d, policy) {
            Ok(v) => cert.push(format!("witness_u_{}", i + 1), v),
            Err(e) => cert.push_error(format!("witness_u_{}", i + 1), &e),
        }
    }
    for (i, (lambda, u)) in model.witnesses_v.iter().enumerate() {
        match check_regularity_witness_v(u, lambda, &d, policy) {
            Ok(v) => cert.push(format!("witness_v_{}", i + 1), v),
            Err(e) => cert.push_error(format!("witness_v_{}", i + 1), &e),
        }
    }
    let grid = grid_for(model, o, 21)?;
    psd_check(&mut cert, &x, &grid, Definiteness::Semidefinite, policy);
    Ok(cert)
}

fn cmd_synthesize(model: &Model, o: &Opts, policy: &ZeroTestPolicy) -> Result<Certificate> {
    let mut cert = Certificate::new("synthesize", model, policy);
    let cm = model.control_model(policy)?;
    let s = match synthesize_controller(&cm, policy) {
        Ok(s) => s,
        Err(Error::Verification(msg)) => {
            let integrability = crate::contraction::check_integrability(&cm, policy)?;
            let v = if integrability.pass { Verdict::fail(msg) } else { integrability };
            cert.push("integrability", v);
            return Ok(cert);
        }
        Err(e) => return Err(e),
    };
    cert.push("integrability", s.integrability.clone());
    cert.push("gradient", s.gradient.clone());
    cert.output("method", json!(s.method));
    match &s.controller {
        Controller::Symbolic(k) => {
            cert.output("controller", json!(k.iter().map(|e| e.to_string()).collect::<Vec<_>>()));
            let g = closed_loop_field(&cm, k)?;
            cert.output(
                "closed_loop",
                json!(g.components().iter().map(|e| e.to_string()).collect::<Vec<_>>()),
            );
            if let Some(given) = &model.controller {
                let mut v = Verdict::pass();
                for (a, b) in k.iter().zip(given) {
                    v = v.and(is_zero(&(a - b), policy)?.into());
                }
                cert.push("matches_model_controller", v);
            }
        }
        Controller::Quadrature(_) => {
            cert.output("controller", json!("quadrature"));
            cert.assumptions.push(format!(
                "controller has no elementary antiderivative; evaluated by {}-node Gauss-Legendre quadrature",
                crate::contraction::QUADRATURE_NODES
            ));
        }
    }
    let grid = grid_for(model, o, 21)?;
    let r = check_contraction_identity(&cm, &s.controller, Some(&grid), policy)?;
    cert.push("contraction_identity", r.identity.clone());
    let neg = r.rhs_negative_definite.unwrap_or(false);
    let max = r.rhs_max_eigenvalue.unwrap_or(f64::NAN);
    let v = if neg {
        Verdict::pass()
    } else {
        Verdict::fail(format!("largest eigenvalue of -Q - X B B^T X is {max}"))
    };
    cert.push_with(
        "contraction_negativity",
        Verdict { exact: false, points: grid.len(), ..v },
        Some(json!({ "grid": grid, "max_eigenvalue": max })),
    );
    cert.assumptions.push(
        "incremental stability is supported by the identity, grid negativity and simulation, not proven globally".into(),
    );
    Ok(cert)
}

/// The field to simulate: the model's controller, a synthesized one, or `f`.
fn simulation_field(model: &Model, policy: &ZeroTestPolicy) -> Result<Box<dyn Dynamics<f64>>> {
    if let Some(k) = &model.controller {
        let b = model.b.clone().ok_or_else(|| Error::Model("controller given without B".into()))?;
        let mut comps = Vec::with_capacity(model.n);
        for i in 0..model.n {
            let mut e = model.f.component(i).clone();
            for (r, kr) in k.iter().enumerate() {
                e = e - &b.get(i, r).re * kr;
            }
            comps.push(simplify(&e));
        }
        return Ok(Box::new(crate::lieop::VectorField::new(comps)?));
    }
    if model.b.is_some() && model.x.is_some() {
        let cm = model.control_model(policy)?;
        let s = synthesize_controller(&cm, policy)?;
        return Ok(match s.method {
            Method::Symbolic => Box::new(closed_loop_field(&cm, s.controller.expressions().expect("symbolic"))?),
            Method::Quadrature => Box::new(ClosedLoop::new(&cm, s.controller)?),
        });
    }
    Ok(Box::new(model.f.clone()))
}

fn parse_x0(s: &str, n: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Model(format!("--x0 \"{s}\" is not a list of numbers")))?;
    if v.len() != n {
        return Err(Error::Model(format!("--x0 needs {n} values")));
    }
    Ok(v)
}

fn write_out(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Model(format!("cannot write {}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Error::Model(format!("cannot write output: {e}"))),
    }
}

fn cmd_simulate(model: &Model, o: &Opts, policy: &ZeroTestPolicy, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let g = simulation_field(model, policy)?;
    let x0 = parse_x0(o.x0.as_deref().ok_or_else(|| Error::Model("simulate needs --x0".into()))?, model.n)?;
    let tr = integrate(g.as_ref(), &x0, 0.0, o.t1.unwrap_or(10.0), o.h.unwrap_or(1e-3))?;
    write_out(o.out.as_deref(), &trajectories_csv(std::slice::from_ref(&tr)), out)?;
    if tr.is_complete() {
        Ok(EXIT_PASS)
    } else {
        let _ = writeln!(err, "trajectory stopped at t = {}: {:?}", tr.final_time(), tr.termination);
        Ok(EXIT_FAIL)
    }
}

fn cmd_portrait(model: &Model, o: &Opts, policy: &ZeroTestPolicy, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let g = simulation_field(model, policy)?;
    let grid = grid_for(model, o, 5)?;
    if grid.axes.len() != model.n {
        return Err(Error::Model(format!("--grid needs {} axes", model.n)));
    }
    let starts = grid.points();
    let trs = phase_portrait(g.as_ref(), &starts, o.t1.unwrap_or(20.0), o.h.unwrap_or(1e-3))?;
    write_out(o.out.as_deref(), &trajectories_csv(&trs), out)?;
    if let Some(path) = &o.out {
        if model.n == 2 {
            write_out(Some(&path.with_extension("svg")), &portrait_svg(&trs)?, out)?;
        }
        let finals: Vec<f64> = trs
            .iter()
            .map(|t| t.final_state().iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        let summary = json!({
            "command": "portrait",
            "model": model.name,
            "trajectories": trs.len(),
            "completed": trs.iter().all(|t| t.is_complete()),
            "max_final_norm": finals.iter().cloned().fold(0.0, f64::max),
        });
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&summary).expect("serializable"));
    }
    if trs.iter().all(|t| t.is_complete()) {
        Ok(EXIT_PASS)
    } else {
        let _ = writeln!(err, "some trajectories stopped early (divergence guard or non-finite values)");
        Ok(EXIT_FAIL)
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let (name, opts) = match &cli.command {
        Command::VerifyDre(o) => ("verify-dre", o),
        Command::Eig(o) => ("eig", o),
        Command::Solve(o) => ("solve", o),
        Command::Synthesize(o) => ("synthesize", o),
        Command::Simulate(o) => ("simulate", o),
        Command::Portrait(o) => ("portrait", o),
    };
    let result = (|| -> Result<i32> {
        let model = Model::load(&opts.model)?;
        let policy = policy_for(&model, opts)?;
        let cert = match name {
            "verify-dre" => cmd_verify_dre(&model, opts, &policy)?,
            "eig" => cmd_eig(&model, opts, &policy)?,
            "solve" => cmd_solve(&model, opts, &policy)?,
            "synthesize" => cmd_synthesize(&model, opts, &policy)?,
            "simulate" => return cmd_simulate(&model, opts, &policy, out, err),
            _ => return cmd_portrait(&model, opts, &policy, out, err),
        };
        let text = serde_json::to_string_pretty(&cert).expect("certificates serialize") + "\n";
        write_out(opts.out.as_deref(), &text, out)?;
        Ok(if cert.pass { EXIT_PASS } else { EXIT_FAIL })
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "drekit {name}: {e}");
            if name == "solve" && matches!(e, Error::OpaqueSymbol(_)) {
                let _ = writeln!(err, "hint: exclude basis columns containing opaque symbols with --skip-columns");
            }
            if is_input_error(&e) {
                EXIT_INPUT
            } else {
                EXIT_FAIL
            }
        }
    }
}

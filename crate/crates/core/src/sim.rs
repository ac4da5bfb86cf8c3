//! Fixed-step RK4 integration, variational propagation, phase portraits.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{simplify, Expr, Point, Var};
use crate::lieop::VectorField;
use crate::Real;

/// Trajectories stop once `‖x‖` exceeds this bound.
pub const DIVERGENCE_BOUND: f64 = 1e6;

/// Right-hand side of `ẋ = g(t, x)`.
pub trait Dynamics<F: Real>: Sync {
    fn dim(&self) -> usize;
    /// `None` when the value is not finite.
    fn rhs(&self, t: F, x: &[F]) -> Option<Vec<F>>;
}

impl<F: Real> Dynamics<F> for VectorField {
    fn dim(&self) -> usize {
        self.n()
    }

    fn rhs(&self, t: F, x: &[F]) -> Option<Vec<F>> {
        self.eval(x, t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// A non-finite value appeared; the trajectory is truncated before it.
    NonFinite,
    /// `‖x‖` exceeded [`DIVERGENCE_BOUND`].
    Diverged,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<F> {
    pub h: F,
    pub times: Vec<F>,
    pub states: Vec<Vec<F>>,
    /// `δx` samples when integrated with the variational system.
    pub variations: Option<Vec<Vec<F>>>,
    pub termination: Termination,
}

impl<F: Real> Trajectory<F> {
    pub fn is_complete(&self) -> bool {
        self.termination == Termination::Completed
    }

    pub fn final_state(&self) -> &[F] {
        self.states.last().expect("trajectories hold the initial state")
    }

    pub fn final_time(&self) -> F {
        *self.times.last().expect("trajectories hold the initial time")
    }
}

fn norm<F: Real>(x: &[F]) -> F {
    x.iter().fold(F::zero(), |acc, v| acc + *v * *v).sqrt()
}

fn axpy<F: Real>(x: &[F], a: F, k: &[F]) -> Vec<F> {
    x.iter().zip(k).map(|(xi, ki)| *xi + a * *ki).collect()
}

fn rk4_step<F: Real, D: Dynamics<F> + ?Sized>(g: &D, t: F, x: &[F], h: F) -> Option<Vec<F>> {
    let two = F::from_f64(2.0)?;
    let half = h / two;
    let k1 = g.rhs(t, x)?;
    let k2 = g.rhs(t + half, &axpy(x, half, &k1))?;
    let k3 = g.rhs(t + half, &axpy(x, half, &k2))?;
    let k4 = g.rhs(t + h, &axpy(x, h, &k3))?;
    let six = F::from_f64(6.0)?;
    let next: Vec<F> = (0..x.len())
        .map(|i| x[i] + h / six * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
        .collect();
    next.iter().all(|v| v.is_finite()).then_some(next)
}

/// Number of uniform steps of size `h` covering `[t0, t1]`.
fn step_count<F: Real>(t0: F, t1: F, h: F) -> Result<usize> {
    if !(h > F::zero()) || !h.is_finite() {
        return Err(Error::Precondition("step size must be positive".into()));
    }
    if !(t1 > t0) || !t1.is_finite() || !t0.is_finite() {
        return Err(Error::Precondition("end time must exceed start time".into()));
    }
    let ratio = ((t1 - t0) / h).to_f64().expect("finite ratio");
    Ok((ratio - 1e-9).ceil().max(1.0) as usize)
}

/// Classical RK4 with fixed step `h` from `t0` to `t1`; the last step is
/// shortened so the trajectory ends exactly at `t1`.
pub fn integrate<F: Real, D: Dynamics<F> + ?Sized>(
    g: &D,
    x0: &[F],
    t0: F,
    t1: F,
    h: F,
) -> Result<Trajectory<F>> {
    if x0.len() != g.dim() {
        return Err(Error::Dimension(format!(
            "initial state has {} entries, field has {}",
            x0.len(),
            g.dim()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial state".into()));
    }
    let steps = step_count(t0, t1, h)?;
    let bound = F::from_f64(DIVERGENCE_BOUND).expect("representable bound");
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(t0);
    states.push(x0.to_vec());
    let mut termination = Termination::Completed;
    for k in 0..steps {
        let t = *times.last().expect("nonempty");
        let x = states.last().expect("nonempty");
        let next_t = if k + 1 == steps {
            t1
        } else {
            t0 + h * F::from_usize(k + 1).expect("step index")
        };
        match rk4_step(g, t, x, next_t - t) {
            None => {
                termination = Termination::NonFinite;
                break;
            }
            Some(next) => {
                let diverged = norm(&next) > bound;
                times.push(next_t);
                states.push(next);
                if diverged {
                    termination = Termination::Diverged;
                    break;
                }
            }
        }
    }
    Ok(Trajectory {
        h,
        times,
        states,
        variations: None,
        termination,
    })
}

/// The field together with its variational equation `d(δx)/dt = ∂f/∂x · δx`.
struct Variational {
    f: VectorField,
    jacobian: Vec<Expr>,
}

impl<F: Real> Dynamics<F> for Variational {
    fn dim(&self) -> usize {
        2 * self.f.n()
    }

    fn rhs(&self, t: F, z: &[F]) -> Option<Vec<F>> {
        let n = self.f.n();
        let p = Point::new(z[..n].to_vec(), t);
        let mut out = self.f.eval_at(&p)?;
        for i in 0..n {
            let mut acc = F::zero();
            for j in 0..n {
                let e = &self.jacobian[i * n + j];
                if !e.is_literal_zero() {
                    acc = acc + e.eval(&p)? * z[n + j];
                }
            }
            out.push(acc);
        }
        Some(out)
    }
}

/// Joint RK4 on `(x, δx)`.
pub fn integrate_variational<F: Real>(
    f: &VectorField,
    x0: &[F],
    dx0: &[F],
    t0: F,
    t1: F,
    h: F,
) -> Result<Trajectory<F>> {
    let n = f.n();
    if dx0.len() != n {
        return Err(Error::Dimension(format!("perturbation has {} entries, field has {n}", dx0.len())));
    }
    let mut jacobian = Vec::with_capacity(n * n);
    for fi in f.components() {
        for j in 0..n {
            jacobian.push(simplify(&fi.diff(&Var::State(j as u32 + 1))?));
        }
    }
    let aug = Variational { f: f.clone(), jacobian };
    let mut z0 = x0.to_vec();
    z0.extend_from_slice(dx0);
    if x0.len() != n {
        return Err(Error::Dimension(format!("initial state has {} entries, field has {n}", x0.len())));
    }
    let joint = integrate(&aug, &z0, t0, t1, h)?;
    let (states, variations) = joint
        .states
        .into_iter()
        .map(|mut z| {
            let dx = z.split_off(n);
            (z, dx)
        })
        .unzip();
    Ok(Trajectory {
        h: joint.h,
        times: joint.times,
        states,
        variations: Some(variations),
        termination: joint.termination,
    })
}

/// One trajectory per start point over `[0, t1]`, in start order.
pub fn phase_portrait<F: Real, D: Dynamics<F> + ?Sized>(
    g: &D,
    starts: &[Vec<F>],
    t1: F,
    h: F,
) -> Result<Vec<Trajectory<F>>> {
    starts
        .par_iter()
        .map(|x0| integrate(g, x0, F::zero(), t1, h))
        .collect()
}

fn fmt_float<F: Real>(out: &mut String, v: F) {
    let v = v.to_f64().expect("finite float");
    write!(out, "{v:.16e}").expect("writing to a string");
}

/// CSV with header `traj_id,t,x1,...,xn[,dx1,...,dxn]`; trajectory ids
/// start at 0.
pub fn trajectories_csv<F: Real>(trajectories: &[Trajectory<F>]) -> String {
    let n = trajectories.first().map_or(0, |t| t.states[0].len());
    let variational = trajectories.iter().any(|t| t.variations.is_some());
    let mut out = String::from("traj_id,t");
    for i in 1..=n {
        write!(out, ",x{i}").expect("writing to a string");
    }
    if variational {
        for i in 1..=n {
            write!(out, ",dx{i}").expect("writing to a string");
        }
    }
    out.push('\n');
    for (id, tr) in trajectories.iter().enumerate() {
        for (k, t) in tr.times.iter().enumerate() {
            write!(out, "{id},").expect("writing to a string");
            fmt_float(&mut out, *t);
            for v in &tr.states[k] {
                out.push(',');
                fmt_float(&mut out, *v);
            }
            if let Some(dx) = &tr.variations {
                for v in &dx[k] {
                    out.push(',');
                    fmt_float(&mut out, *v);
                }
            }
            out.push('\n');
        }
    }
    out
}

/// SVG drawing of planar trajectories as polylines, fitted to the data with
/// a 5% margin, y axis pointing up. Start points are marked with dots.
pub fn portrait_svg<F: Real>(trajectories: &[Trajectory<F>]) -> Result<String> {
    const SIZE: f64 = 600.0;
    let pts: Vec<Vec<(f64, f64)>> = trajectories
        .iter()
        .map(|tr| {
            tr.states
                .iter()
                .map(|x| match x.as_slice() {
                    [a, b] => Ok((a.to_f64().unwrap_or(0.0), b.to_f64().unwrap_or(0.0))),
                    _ => Err(Error::Dimension("portraits need two states".into())),
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let all = pts.iter().flatten();
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    if xmin > xmax {
        (xmin, xmax, ymin, ymax) = (-1.0, 1.0, -1.0, 1.0);
    }
    let span = (xmax - xmin).max(ymax - ymin).max(1e-12) * 1.1;
    let (cx, cy) = ((xmin + xmax) / 2.0, (ymin + ymax) / 2.0);
    let map = |(x, y): (f64, f64)| {
        (
            (x - cx) / span * SIZE + SIZE / 2.0,
            SIZE / 2.0 - (y - cy) / span * SIZE,
        )
    };
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    let (ox, oy) = map((0.0, 0.0));
    writeln!(
        out,
        "<g stroke=\"#bbb\" stroke-width=\"1\"><line x1=\"0\" y1=\"{oy:.2}\" x2=\"{SIZE}\" y2=\"{oy:.2}\"/><line x1=\"{ox:.2}\" y1=\"0\" x2=\"{ox:.2}\" y2=\"{SIZE}\"/></g>"
    )
    .expect("writing to a string");
    for line in &pts {
        let coords: Vec<String> = line
            .iter()
            .map(|p| {
                let (x, y) = map(*p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"#1f4e99\" stroke-width=\"1.2\" points=\"{}\"/>",
            coords.join(" ")
        )
        .expect("writing to a string");
        if let Some(p) = line.first() {
            let (x, y) = map(*p);
            writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"#c0392b\"/>")
                .expect("writing to a string");
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub initial_separation: f64,
    pub final_separation: f64,
    /// Fraction of steps over which the separation did not grow.
    pub decrease_fraction: f64,
    pub completed: bool,
}

/// Separation `‖x_a(t) − x_b(t)‖` of trajectory pairs over `[0, t1]`.
pub fn incremental_convergence<F: Real, D: Dynamics<F> + ?Sized>(
    g: &D,
    pairs: &[(Vec<F>, Vec<F>)],
    t1: F,
    h: F,
) -> Result<Vec<PairReport>> {
    pairs
        .par_iter()
        .map(|(a, b)| {
            let ta = integrate(g, a, F::zero(), t1, h)?;
            let tb = integrate(g, b, F::zero(), t1, h)?;
            let len = ta.states.len().min(tb.states.len());
            let sep: Vec<F> = (0..len)
                .map(|k| {
                    let d: Vec<F> = ta.states[k].iter().zip(&tb.states[k]).map(|(x, y)| *x - *y).collect();
                    norm(&d)
                })
                .collect();
            let steps = len.saturating_sub(1);
            let down = sep.windows(2).filter(|w| w[1] <= w[0]).count();
            let to64 = |v: &[F]| v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
            Ok(PairReport {
                a: to64(a),
                b: to64(b),
                initial_separation: sep[0].to_f64().unwrap_or(f64::NAN),
                final_separation: sep[len - 1].to_f64().unwrap_or(f64::NAN),
                decrease_fraction: if steps == 0 { 1.0 } else { down as f64 / steps as f64 },
                completed: ta.is_complete() && tb.is_complete(),
            })
        })
        .collect()
}

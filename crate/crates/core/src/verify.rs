//! Verification of expression-valued Lyapunov candidates.
//!
//! `verify_interval` is a branch-and-bound over the box `[-R, R]^n` with
//! outward-rounded interval bounds. `verify_sampling` is a multistart local
//! search that can only falsify; its positive answer is flagged numeric only.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;

use crate::deadline::Deadline;
use crate::diff::{gradient, lie_derivative};
use crate::expr::{DomainError, Expr, System};
use crate::interval::{eval_interval, Interval};
use crate::poly::{expand_to_poly, Poly};
use crate::score::{Condition, UnknownReason, Verdict};
use crate::simplify::simplify;
use crate::sos::{check_sos, lie_derivative_poly, polynomial_system, shifted, SosOutcome, SosSettings};

/// `V(0)` must vanish to this accuracy.
pub const ORIGIN_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct IntervalConfig {
    /// Half-width of the verified box.
    pub radius: f64,
    /// Allowed slack in `grad V . f <= delta`.
    pub delta: f64,
    /// Positivity is not checked inside `|x|_inf < delta0`.
    pub delta0: f64,
    pub max_nodes: u64,
}

impl Default for IntervalConfig {
    fn default() -> Self {
        IntervalConfig {
            radius: 10.0,
            delta: 1e-6,
            delta0: 1e-3,
            max_nodes: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntervalStats {
    pub nodes: u64,
    pub max_depth: u32,
    pub domain_boxes: u64,
}

/// A function with its gradient, evaluated with the tighter of two enclosures.
struct Bounded {
    forms: Vec<Expr>,
    grad: Vec<Expr>,
}

impl Bounded {
    fn new(raw: Expr, n: usize) -> Self {
        let simple = simplify(&raw);
        let grad = gradient(&simple, n).iter().map(simplify).collect();
        let forms = if simple == raw { vec![raw] } else { vec![raw, simple] };
        Bounded { forms, grad }
    }

    fn point(&self, x: &[f64]) -> Result<(f64, f64), DomainError> {
        self.forms[self.forms.len() - 1].eval_with_magnitude(x)
    }

    /// Intersection of the natural extensions and the mean-value form.
    fn enclose(&self, bx: &[Interval]) -> Result<Interval, DomainError> {
        let mut out: Option<Interval> = None;
        let mut err = None;
        let mut meet = |r: Result<Interval, DomainError>| match r {
            Ok(i) => {
                out = Some(match out {
                    None => i,
                    Some(o) => o.intersect(&i).unwrap_or(i),
                })
            }
            Err(e) => err = Some(e),
        };
        for f in &self.forms {
            meet(eval_interval(f, bx));
        }
        meet(self.mean_value(bx));
        out.ok_or(err.unwrap_or(DomainError::NonFinite))
    }

    fn mean_value(&self, bx: &[Interval]) -> Result<Interval, DomainError> {
        let c: Vec<Interval> = bx.iter().map(|i| Interval::point(i.mid())).collect();
        let mut acc = eval_interval(&self.forms[self.forms.len() - 1], &c)?;
        for (i, g) in self.grad.iter().enumerate() {
            let gi = eval_interval(g, bx)?;
            acc = acc.add(&gi.mul(&bx[i].sub(&c[i])));
        }
        Ok(acc)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Goal {
    /// Prove `V > 0` outside the inner cube.
    Positive,
    /// Prove `grad V . f <= delta`.
    Decrease,
}

struct Node {
    /// Larger is worse.
    key: f64,
    seq: u64,
    depth: u32,
    bx: Vec<Interval>,
}

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    fn cmp(&self, o: &Self) -> Ordering {
        self.key.total_cmp(&o.key).then_with(|| o.seq.cmp(&self.seq))
    }
}

enum Outcome {
    Proved,
    Falsified(Vec<f64>),
    Exhausted(UnknownReason),
}

fn inside_inner(bx: &[Interval], d0: f64) -> bool {
    bx.iter().all(|i| i.lo > -d0 && i.hi < d0)
}

fn outside_inner(x: &[f64], d0: f64) -> bool {
    x.iter().any(|v| libm::fabs(*v) >= d0)
}

/// Split coordinate and point: the inner-cube faces first, then the widest side at its midpoint.
fn split(bx: &[Interval], d0: Option<f64>) -> (usize, f64) {
    if let Some(d0) = d0 {
        let mut best: Option<(usize, f64, f64)> = None;
        for (i, iv) in bx.iter().enumerate() {
            for s in [-d0, d0] {
                if iv.lo < s && s < iv.hi && best.is_none_or(|b| iv.width() > b.2) {
                    best = Some((i, s, iv.width()));
                }
            }
        }
        if let Some((i, s, _)) = best {
            return (i, s);
        }
    }
    let (i, iv) = bx
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.width().total_cmp(&b.1.width()).then(b.0.cmp(&a.0)))
        .expect("nonempty box");
    (i, iv.mid())
}

fn branch_and_bound(
    f: &Bounded,
    goal: Goal,
    cfg: &IntervalConfig,
    n: usize,
    stats: &mut IntervalStats,
    deadline: &dyn Deadline,
) -> Outcome {
    let d0 = cfg.delta0;
    let root = vec![Interval::new(-cfg.radius, cfg.radius); n];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        key: f64::INFINITY,
        seq,
        depth: 0,
        bx: root,
    });
    let mut domain = false;
    // Below this width a box that still errors is recorded as a domain problem.
    let min_width = cfg.radius * 1e-9;
    while let Some(node) = heap.pop() {
        if stats.nodes >= cfg.max_nodes {
            return Outcome::Exhausted(UnknownReason::Budget);
        }
        if stats.nodes % 64 == 0 && deadline.expired() {
            return Outcome::Exhausted(UnknownReason::Timeout);
        }
        stats.nodes += 1;
        stats.max_depth = stats.max_depth.max(node.depth);
        let bx = node.bx;
        if goal == Goal::Positive && inside_inner(&bx, d0) {
            continue;
        }
        let mid: Vec<f64> = bx.iter().map(Interval::mid).collect();
        let point_ok = match f.point(&mid) {
            Ok((v, mag)) => {
                let tol = 1e-9 * (1.0 + mag);
                match goal {
                    Goal::Positive if outside_inner(&mid, d0) && v < -tol => return Outcome::Falsified(mid),
                    Goal::Decrease if v > cfg.delta + tol => return Outcome::Falsified(mid),
                    _ => true,
                }
            }
            Err(_) => false,
        };
        let key = match f.enclose(&bx) {
            Ok(r) => match goal {
                Goal::Positive if r.lo > 0.0 => continue,
                Goal::Decrease if r.hi <= cfg.delta => continue,
                Goal::Positive => -r.lo,
                Goal::Decrease => r.hi,
            },
            Err(_) => {
                let w = bx.iter().map(Interval::width).fold(0.0, f64::max);
                if !point_ok || w < min_width {
                    domain = true;
                    stats.domain_boxes += 1;
                    continue;
                }
                f64::INFINITY
            }
        };
        let (i, s) = split(&bx, if goal == Goal::Positive { Some(d0) } else { None });
        for half in [Interval::new(bx[i].lo, s), Interval::new(s, bx[i].hi)] {
            let mut child = bx.clone();
            child[i] = half;
            seq += 1;
            heap.push(Node {
                key,
                seq,
                depth: node.depth + 1,
                bx: child,
            });
        }
    }
    if domain {
        Outcome::Exhausted(UnknownReason::DomainError)
    } else {
        Outcome::Proved
    }
}

/// Branch-and-bound proof of `V > 0` on `delta0 <= |x|_inf <= R` and
/// `grad V . f <= delta` on `|x|_inf <= R`.
pub fn verify_interval(
    sys: &System,
    v: &Expr,
    cfg: &IntervalConfig,
    deadline: &dyn Deadline,
) -> (Verdict, IntervalStats) {
    let n = sys.dim();
    let mut stats = IntervalStats::default();
    match v.eval(&vec![0.0; n]) {
        Ok(v0) if libm::fabs(v0) <= ORIGIN_TOL => {}
        Ok(_) => {
            return (
                Verdict::Falsified {
                    condition: Condition::Origin,
                    witness: vec![0.0; n],
                },
                stats,
            )
        }
        Err(_) => {
            return (
                Verdict::Unknown {
                    reason: UnknownReason::DomainError,
                },
                stats,
            )
        }
    }
    let vb = Bounded::new(v.clone(), n);
    let vdot = Bounded::new(lie_derivative(v, &sys.equations), n);
    for (goal, f, cond) in [
        (Goal::Positive, &vb, Condition::Positivity),
        (Goal::Decrease, &vdot, Condition::Decrease),
    ] {
        match branch_and_bound(f, goal, cfg, n, &mut stats, deadline) {
            Outcome::Proved => {}
            Outcome::Falsified(witness) => return (Verdict::Falsified { condition: cond, witness }, stats),
            Outcome::Exhausted(reason) => return (Verdict::Unknown { reason }, stats),
        }
    }
    (Verdict::Certified { numeric_only: false }, stats)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SamplingConfig {
    pub radius: f64,
    pub delta: f64,
    pub delta0: f64,
    pub n_starts: usize,
    /// Projected-gradient iterations per start.
    pub max_iter: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            radius: 10.0,
            delta: 1e-6,
            delta0: 1e-3,
            n_starts: 50,
            max_iter: 30,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SamplingStats {
    pub evaluations: u64,
    pub discarded: u64,
}

/// Expanded polynomials evaluate far faster than the equivalent trees.
enum Form {
    Tree(Expr),
    Poly(Poly<f64>),
}

impl Form {
    fn eval(&self, x: &[f64]) -> Result<f64, DomainError> {
        match self {
            Form::Tree(e) => e.eval(x),
            Form::Poly(p) => Some(p.eval(x)).filter(|v| v.is_finite()).ok_or(DomainError::NonFinite),
        }
    }

    /// Value and the scale of its rounding error.
    fn eval_with_magnitude(&self, x: &[f64]) -> Result<(f64, f64), DomainError> {
        match self {
            Form::Tree(e) => e.eval_with_magnitude(x),
            Form::Poly(p) => {
                let (mut v, mut m) = (0.0, 0.0);
                for (mono, c) in p.terms() {
                    let t = c * mono.eval(x);
                    v += t;
                    m += libm::fabs(t);
                }
                if v.is_finite() && m.is_finite() {
                    Ok((v, m))
                } else {
                    Err(DomainError::NonFinite)
                }
            }
        }
    }
}

struct Smooth {
    f: Form,
    grad: Vec<Form>,
}

impl Smooth {
    fn tree(f: Expr, n: usize) -> Self {
        let f = simplify(&f);
        let grad = gradient(&f, n).iter().map(|g| Form::Tree(simplify(g))).collect();
        Smooth { f: Form::Tree(f), grad }
    }

    fn poly(p: Poly<f64>) -> Self {
        let grad = (0..p.nvars()).map(|i| Form::Poly(p.derivative(i))).collect();
        Smooth { f: Form::Poly(p), grad }
    }

    fn grad_at(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.grad.iter().map(|g| g.eval(x).ok().filter(|v| v.is_finite())).collect()
    }
}

fn project(x: &mut [f64], r: f64) {
    for v in x.iter_mut() {
        *v = v.clamp(-r, r);
    }
}

/// Minimise `sign * f` from `x` by projected gradient with Armijo backtracking.
/// `feasible` rejects iterates (the inner cube for positivity).
fn descend(
    s: &Smooth,
    sign: f64,
    x: &mut Vec<f64>,
    cfg: &SamplingConfig,
    feasible: &dyn Fn(&[f64]) -> bool,
    stats: &mut SamplingStats,
) {
    let Ok(mut fx) = s.f.eval(x) else { return };
    let mut step = cfg.radius * 0.1;
    for _ in 0..cfg.max_iter {
        let Some(g) = s.grad_at(x) else { return };
        let gn = libm::sqrt(g.iter().map(|v| v * v).sum::<f64>());
        if gn == 0.0 {
            return;
        }
        let mut improved = false;
        let mut t = step;
        while t > 1e-12 * cfg.radius {
            let mut y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - sign * t * gi / gn).collect();
            project(&mut y, cfg.radius);
            stats.evaluations += 1;
            if feasible(&y) {
                if let Ok(fy) = s.f.eval(&y) {
                    let moved: f64 = y.iter().zip(x.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                    if sign * fy <= sign * fx - 1e-4 * gn * libm::sqrt(moved) && moved > 0.0 {
                        *x = y;
                        fx = fy;
                        improved = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !improved {
            return;
        }
        step = (t * 2.0).min(cfg.radius);
    }
}

/// Multistart local search for violations of `V > 0` (outside the inner cube)
/// and of `grad V . f <= delta` (on the whole box).
pub fn verify_sampling<R: Rng + ?Sized>(
    sys: &System,
    v: &Expr,
    cfg: &SamplingConfig,
    rng: &mut R,
    deadline: &dyn Deadline,
) -> (Verdict, SamplingStats) {
    let n = sys.dim();
    let mut stats = SamplingStats::default();
    match v.eval(&vec![0.0; n]) {
        Ok(v0) if libm::fabs(v0) <= ORIGIN_TOL => {}
        Ok(_) => {
            return (
                Verdict::Falsified {
                    condition: Condition::Origin,
                    witness: vec![0.0; n],
                },
                stats,
            )
        }
        Err(_) => {
            return (
                Verdict::Unknown {
                    reason: UnknownReason::DomainError,
                },
                stats,
            )
        }
    }
    let (sv, sd) = match (polynomial_system(sys), expand_to_poly(v, n)) {
        (Ok(f), Ok(vp)) => (
            Smooth::poly(vp.to_f64_poly()),
            Smooth::poly(lie_derivative_poly(&vp, &f).to_f64_poly()),
        ),
        _ => (
            Smooth::tree(v.clone(), n),
            Smooth::tree(lie_derivative(v, &sys.equations), n),
        ),
    };
    let d0 = cfg.delta0;
    let in_shell = move |x: &[f64]| outside_inner(x, d0);
    let anywhere = |_: &[f64]| true;
    let violates = |s: &Smooth, x: &[f64], goal: Goal| -> Option<bool> {
        let (val, mag) = s.f.eval_with_magnitude(x).ok()?;
        let tol = 1e-9 * (1.0 + mag);
        Some(match goal {
            Goal::Positive => val < -tol,
            Goal::Decrease => val > cfg.delta + tol,
        })
    };
    for k in 0..cfg.n_starts {
        if deadline.expired() {
            return (
                Verdict::Unknown {
                    reason: UnknownReason::Timeout,
                },
                stats,
            );
        }
        for (goal, s, sign, cond) in [
            (Goal::Positive, &sv, 1.0, Condition::Positivity),
            (Goal::Decrease, &sd, -1.0, Condition::Decrease),
        ] {
            let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-cfg.radius..=cfg.radius)).collect();
            // A few starts sit on the axes, where cancellations hide.
            if k < n {
                for (i, xi) in x.iter_mut().enumerate() {
                    if i != k {
                        *xi = 0.0;
                    }
                }
            }
            if goal == Goal::Positive && !in_shell(&x) {
                x[0] = d0.copysign(x[0]);
            }
            stats.evaluations += 1;
            match violates(s, &x, goal) {
                None => {
                    stats.discarded += 1;
                    continue;
                }
                Some(true) => return (Verdict::Falsified { condition: cond, witness: x }, stats),
                Some(false) => {}
            }
            let feasible: &dyn Fn(&[f64]) -> bool = if goal == Goal::Positive { &in_shell } else { &anywhere };
            descend(s, sign, &mut x, cfg, feasible, &mut stats);
            if violates(s, &x, goal) == Some(true) {
                return (Verdict::Falsified { condition: cond, witness: x }, stats);
            }
        }
    }
    (Verdict::Certified { numeric_only: true }, stats)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Radial {
    /// `V - 1e-6 |x|^2` is SOS.
    Proven,
    /// `V` strictly increases along every sampled ray at radii 10, 100, 1000.
    Heuristic,
    Unknown,
}

pub const RADIAL_RAYS: usize = 100;

/// Evidence that `V(x) -> infinity` as `|x| -> infinity`.
pub fn check_radial_unboundedness<R: Rng + ?Sized>(v: &Expr, n: usize, rng: &mut R, deadline: &dyn Deadline) -> Radial {
    if let Ok(p) = expand_to_poly(v, n) {
        let settings = SosSettings::default();
        if let Ok(SosOutcome::Sos(_)) = check_sos(&shifted(&p, &vec![1e-6; n]), &settings, deadline) {
            return Radial::Proven;
        }
    }
    let mut rays: Vec<Vec<f64>> = Vec::with_capacity(RADIAL_RAYS + 2 * n);
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut u = vec![0.0; n];
            u[i] = s;
            rays.push(u);
        }
    }
    while rays.len() < RADIAL_RAYS + 2 * n {
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = libm::sqrt(u.iter().map(|x| x * x).sum::<f64>());
        if norm > 1e-3 {
            rays.push(u.iter().map(|x| x / norm).collect());
        }
    }
    for u in &rays {
        let mut prev = f64::NEG_INFINITY;
        for r in [10.0, 100.0, 1000.0] {
            let x: Vec<f64> = u.iter().map(|c| c * r).collect();
            match v.eval(&x) {
                Ok(val) if val.is_finite() && val > prev => prev = val,
                _ => return Radial::Unknown,
            }
        }
    }
    Radial::Heuristic
}

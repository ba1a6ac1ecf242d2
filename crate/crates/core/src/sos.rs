//! Sum-of-squares certificates via Gram matrices.
//!
//! `p` is SOS when `p = m^T Q m` for some psd `Q` over a monomial vector `m`.
//! Finding `Q` is an SDP feasibility problem with one coefficient-matching
//! row per monomial. Certificates are floating point and are replayed
//! against `p` before being returned.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::deadline::Deadline;
use crate::expr::System;
use crate::linalg::{cholesky, min_eigenvalue, Mat};
use crate::poly::{expand_to_poly, monomials_of_degree, Monomial, NotPolynomial, Poly, PolyNF};
use crate::score::{Condition, UnknownReason, Verdict};
use crate::sdp::{psd_projection, solve_feasibility, Constraint, Entry, Feasibility, SdpFailure, SdpProblem, SdpSettings};

pub const DEFAULT_BASIS_CAP: usize = 120;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SosSettings {
    pub basis_cap: usize,
    pub psd_tol: f64,
    /// Coefficient residual tolerance, relative to the largest coefficient.
    pub res_tol: f64,
    pub sdp: SdpSettings,
}

impl Default for SosSettings {
    fn default() -> Self {
        SosSettings {
            basis_cap: DEFAULT_BASIS_CAP,
            psd_tol: 1e-8,
            res_tol: 1e-6,
            sdp: SdpSettings::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SosError {
    #[error("monomial basis of size {size} exceeds the cap of {cap}")]
    BasisTooLarge { size: usize, cap: usize },
}

#[derive(Clone, Debug)]
pub struct SosCertificate {
    pub basis: Vec<Monomial>,
    pub gram: Mat,
    /// `max |coeff(p) - coeff(m^T Q m)|`.
    pub residual: f64,
    pub min_eig: f64,
}

impl SosCertificate {
    /// `m^T Q m` expanded.
    pub fn gram_poly(&self, nvars: usize) -> Poly<f64> {
        let mut out = Poly::zero(nvars);
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                out.add_term(a.mul(b), self.gram[(i, j)]);
            }
        }
        out
    }

    /// Coefficient-wise distance to `p`, recomputed from the basis and Gram matrix alone.
    pub fn replay(&self, p: &Poly<f64>) -> f64 {
        let g = self.gram_poly(p.nvars());
        g.sub(p).terms().map(|(_, c)| libm::fabs(*c)).fold(0.0, f64::max)
    }

    /// Cholesky of `Q + shift I` succeeds.
    pub fn cholesky_replay(&self, shift: f64) -> bool {
        let n = self.gram.rows();
        let mut q = self.gram.clone();
        for i in 0..n {
            q[(i, i)] += shift;
        }
        n == 0 || cholesky(&q).is_some()
    }
}

/// Moments `y_gamma` with `sum_gamma y_gamma p_gamma = value < 0` and psd moment matrix
/// `M[a][b] = y_{a+b}` (up to `min_eig`), so no Gram matrix for `p` exists.
#[derive(Clone, Debug)]
pub struct DualWitness {
    pub basis: Vec<Monomial>,
    pub moments: Vec<(Monomial, f64)>,
    pub value: f64,
    pub min_eig: f64,
}

impl DualWitness {
    pub fn moment(&self, m: &Monomial) -> f64 {
        self.moments
            .binary_search_by(|(k, _)| k.cmp(m))
            .map(|i| self.moments[i].1)
            .unwrap_or(0.0)
    }

    pub fn moment_matrix(&self) -> Mat {
        let n = self.basis.len();
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.moment(&self.basis[i].mul(&self.basis[j]));
            }
        }
        m
    }
}

#[derive(Clone, Debug)]
pub enum SosOutcome {
    Sos(SosCertificate),
    NotSos(DualWitness),
    Unknown(SdpFailure),
}

impl SosOutcome {
    pub fn is_sos(&self) -> bool {
        matches!(self, SosOutcome::Sos(_))
    }
}

/// All monomials of degree `1..=degree/2` in `n` variables.
pub fn monomial_basis(n: usize, degree: u32, cap: usize) -> Result<Vec<Monomial>, SosError> {
    let b = monomials_of_degree(n, 1, degree / 2);
    if b.len() > cap {
        return Err(SosError::BasisTooLarge { size: b.len(), cap });
    }
    Ok(b)
}

/// Gram basis for a polynomial whose support is contained in `support`.
///
/// Half-degree and per-variable exponent bounds of the Newton polytope, then
/// repeated removal of any `a` for which `2a` can only arise as `a + a` and is
/// absent from the support: such a diagonal entry is zero, hence so is its row.
pub fn newton_basis(n: usize, support: &BTreeSet<Monomial>, cap: usize) -> Result<Vec<Monomial>, SosError> {
    if support.is_empty() {
        return Ok(Vec::new());
    }
    let mut lo_deg = u32::MAX;
    let mut hi_deg = 0;
    let mut lo = alloc::vec![u32::MAX; n];
    let mut hi = alloc::vec![0u32; n];
    for m in support {
        lo_deg = lo_deg.min(m.degree());
        hi_deg = hi_deg.max(m.degree());
        for (i, &e) in m.exps().iter().enumerate() {
            lo[i] = lo[i].min(e);
            hi[i] = hi[i].max(e);
        }
    }
    let mut basis: Vec<Monomial> = monomials_of_degree(n, lo_deg.div_ceil(2), hi_deg / 2)
        .into_iter()
        .filter(|m| {
            m.exps()
                .iter()
                .enumerate()
                .all(|(i, &e)| e >= lo[i].div_ceil(2) && e <= hi[i] / 2)
        })
        .collect();
    loop {
        let mut cross: BTreeSet<Monomial> = BTreeSet::new();
        for (i, a) in basis.iter().enumerate() {
            for b in &basis[i + 1..] {
                cross.insert(a.mul(b));
            }
        }
        let before = basis.len();
        basis.retain(|a| {
            let d = a.mul(a);
            support.contains(&d) || cross.contains(&d)
        });
        if basis.len() == before {
            break;
        }
    }
    if basis.len() > cap {
        return Err(SosError::BasisTooLarge { size: basis.len(), cap });
    }
    Ok(basis)
}

/// Coefficient-matching rows for `p = m^T Q m`, one per monomial, in ascending order.
pub fn gram_rows(p: &Poly<f64>, basis: &[Monomial], block: usize) -> Vec<(Monomial, Constraint)> {
    let mut rows: alloc::collections::BTreeMap<Monomial, Constraint> = alloc::collections::BTreeMap::new();
    for (m, c) in p.terms() {
        rows.entry(m.clone()).or_default().rhs = *c;
    }
    for i in 0..basis.len() {
        for j in i..basis.len() {
            rows.entry(basis[i].mul(&basis[j])).or_default().entries.push(Entry {
                block,
                i,
                j,
                value: 1.0,
            });
        }
    }
    rows.into_iter().collect()
}

/// Decide whether `p` is a sum of squares.
pub fn check_sos(p: &Poly<f64>, settings: &SosSettings, deadline: &dyn Deadline) -> Result<SosOutcome, SosError> {
    let n = p.nvars();
    let support: BTreeSet<Monomial> = p.terms().map(|(m, _)| m.clone()).collect();
    let basis = newton_basis(n, &support, settings.basis_cap)?;
    let rows = gram_rows(p, &basis, 0);
    let prob = SdpProblem {
        blocks: alloc::vec![basis.len()],
        constraints: rows.iter().map(|(_, c)| c.clone()).collect(),
    };
    let scale = p.max_abs_coeff().max(f64::MIN_POSITIVE);
    match solve_feasibility(&prob, &settings.sdp, deadline) {
        Feasibility::Feasible(pt) => {
            let gram = if basis.is_empty() {
                Mat::zeros(0, 0)
            } else {
                psd_projection(&pt.blocks[0].symmetrize())
            };
            let mut cert = SosCertificate {
                basis,
                gram,
                residual: 0.0,
                min_eig: 0.0,
            };
            cert.residual = cert.replay(p);
            cert.min_eig = if cert.basis.is_empty() { 0.0 } else { min_eigenvalue(&cert.gram) };
            if cert.residual <= settings.res_tol * scale && cert.min_eig >= -settings.psd_tol {
                Ok(SosOutcome::Sos(cert))
            } else {
                Ok(SosOutcome::Unknown(SdpFailure::Numerical))
            }
        }
        Feasibility::Infeasible(f) => {
            let moments: Vec<(Monomial, f64)> = rows.into_iter().zip(&f.y).map(|((m, _), y)| (m, *y)).collect();
            Ok(SosOutcome::NotSos(DualWitness {
                basis,
                moments,
                value: f.value,
                min_eig: f.min_eig,
            }))
        }
        Feasibility::Unknown(e) => Ok(SosOutcome::Unknown(e)),
    }
}

/// `grad V . f` for polynomial data.
pub fn lie_derivative_poly(v: &PolyNF, f: &[PolyNF]) -> PolyNF {
    let mut out = PolyNF::zero(v.nvars());
    for (i, fi) in f.iter().enumerate() {
        out = out.add(&v.derivative(i).mul(fi));
    }
    out
}

/// Expand every equation, failing on the first non-polynomial one.
pub fn polynomial_system(sys: &System) -> Result<Vec<PolyNF>, NotPolynomial> {
    let n = sys.dim();
    sys.equations.iter().map(|e| expand_to_poly(e, n)).collect()
}

/// `V - sum eps_i x_i^2`.
pub fn shifted(v: &PolyNF, eps: &[f64]) -> Poly<f64> {
    let n = v.nvars();
    let mut p = v.to_f64_poly();
    for (i, &e) in eps.iter().enumerate().take(n) {
        let mut ex = alloc::vec![0; n];
        ex[i] = 2;
        p.add_term(Monomial::new(ex), -e);
    }
    p
}

/// Residual and smallest Gram eigenvalue of one certificate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertificateSummary {
    pub residual: f64,
    pub min_eig: f64,
}

/// What each half of `verify_lyapunov_sos` established.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SosReport {
    pub positivity: Option<CertificateSummary>,
    pub decrease: Option<CertificateSummary>,
}

/// Certified iff `V(0) = 0`, `V - sum eps_i x_i^2` is SOS and `-grad V . f` is SOS.
///
/// Pass `eps = 0` for the barrier check.
pub fn verify_lyapunov_sos(
    f: &[PolyNF],
    v: &PolyNF,
    eps: &[f64],
    settings: &SosSettings,
    deadline: &dyn Deadline,
) -> Verdict {
    verify_lyapunov_sos_report(f, v, eps, settings, deadline).0
}

pub fn verify_lyapunov_sos_report(
    f: &[PolyNF],
    v: &PolyNF,
    eps: &[f64],
    settings: &SosSettings,
    deadline: &dyn Deadline,
) -> (Verdict, SosReport) {
    let n = v.nvars();
    let mut report = SosReport::default();
    if !v.constant_term().is_zero() {
        let verdict = Verdict::Falsified {
            condition: Condition::Origin,
            witness: alloc::vec![0.0; n],
        };
        return (verdict, report);
    }
    let unknown = |e: SdpFailure| Verdict::Unknown {
        reason: match e {
            SdpFailure::Timeout => UnknownReason::Timeout,
            _ => UnknownReason::SolverFailure,
        },
    };
    let budget = Verdict::Unknown {
        reason: UnknownReason::Budget,
    };
    let summary = |c: &SosCertificate| CertificateSummary {
        residual: c.residual,
        min_eig: c.min_eig,
    };
    match check_sos(&shifted(v, eps), settings, deadline) {
        Err(_) => return (budget, report),
        Ok(SosOutcome::Sos(c)) => report.positivity = Some(summary(&c)),
        Ok(SosOutcome::NotSos(_)) => {
            let verdict = Verdict::Rejected {
                condition: Condition::Positivity,
            };
            return (verdict, report);
        }
        Ok(SosOutcome::Unknown(e)) => return (unknown(e), report),
    }
    let decrease = lie_derivative_poly(v, f).neg().to_f64_poly();
    let verdict = match check_sos(&decrease, settings, deadline) {
        Err(_) => budget,
        Ok(SosOutcome::Sos(c)) => {
            report.decrease = Some(summary(&c));
            Verdict::Certified { numeric_only: false }
        }
        Ok(SosOutcome::NotSos(_)) => Verdict::Rejected {
            condition: Condition::Decrease,
        },
        Ok(SosOutcome::Unknown(e)) => unknown(e),
    };
    (verdict, report)
}

/// `verify_lyapunov_sos` on expression inputs; non-polynomial data is Unsupported.
pub fn verify_lyapunov_sos_expr(
    sys: &System,
    v: &crate::expr::Expr,
    eps: &[f64],
    settings: &SosSettings,
    deadline: &dyn Deadline,
) -> Verdict {
    let unsupported = Verdict::Unknown {
        reason: UnknownReason::Unsupported,
    };
    let Ok(f) = polynomial_system(sys) else {
        return unsupported;
    };
    let Ok(vp) = expand_to_poly(v, sys.dim()) else {
        return unsupported;
    };
    verify_lyapunov_sos(&f, &vp, eps, settings, deadline)
}

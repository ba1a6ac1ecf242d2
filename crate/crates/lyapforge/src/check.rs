//! Running the verifiers on (system, candidate) pairs.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use lyapforge_core::forward::DEFAULT_EPS;
use lyapforge_core::poly::expand_to_poly;
use lyapforge_core::rng::stream;
use lyapforge_core::score::{UnknownReason, Verdict};
use lyapforge_core::sos::{polynomial_system, verify_lyapunov_sos_report, SosReport, SosSettings};
use lyapforge_core::verify::{verify_interval, verify_sampling, IntervalConfig, IntervalStats, SamplingConfig, SamplingStats};
use lyapforge_core::{Expr, System};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::deadline::Timer;
use crate::error::{PipelineError, Result};
use crate::record::{read_records, write_jsonl};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Sos,
    Interval,
    Sampling,
    /// SOS for polynomial pairs, then interval analysis unless SOS certified.
    Auto,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Sos => "sos",
            Method::Interval => "interval",
            Method::Sampling => "sampling",
            Method::Auto => "auto",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [Method::Sos, Method::Interval, Method::Sampling, Method::Auto]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method {s:?}; expected sos, interval, sampling or auto"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifySettings {
    pub method: Method,
    /// Per verifier call.
    pub timeout_s: f64,
    /// SOS positivity margin: `V - eps * |x|^2` must be SOS.
    pub eps: f64,
    pub interval: IntervalConfig,
    pub sampling: SamplingConfig,
    /// Master seed of the sampling verifier.
    pub seed: u64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            method: Method::Auto,
            timeout_s: 60.0,
            eps: DEFAULT_EPS,
            interval: IntervalConfig::default(),
            sampling: SamplingConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub method: Method,
    pub verdict: Verdict,
    pub wall_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sos: Option<SosReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<IntervalStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checked {
    /// Verdict of the last attempt.
    pub verdict: Verdict,
    pub attempts: Vec<Attempt>,
}

/// Sampling stream of a pair, independent of its position in any file.
fn stream_index(sys: &System, v: &Expr) -> u64 {
    let mut h = Sha256::new();
    for e in &sys.equations {
        h.update(e.to_string().as_bytes());
        h.update(b";");
    }
    h.update(v.to_string().as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

fn attempt(method: Method, sys: &System, v: &Expr, s: &VerifySettings) -> Attempt {
    let timer = Timer::after_secs(s.timeout_s);
    let start = Instant::now();
    let mut a = Attempt {
        method,
        verdict: Verdict::Unknown {
            reason: UnknownReason::Unsupported,
        },
        wall_ms: 0.0,
        sos: None,
        interval: None,
        sampling: None,
    };
    match method {
        Method::Sos => {
            let n = sys.dim();
            if let (Ok(f), Ok(vp)) = (polynomial_system(sys), expand_to_poly(v, n)) {
                let (verdict, rep) = verify_lyapunov_sos_report(&f, &vp, &vec![s.eps; n], &SosSettings::default(), &timer);
                a.verdict = verdict;
                a.sos = Some(rep);
            }
        }
        Method::Interval => {
            let (verdict, st) = verify_interval(sys, v, &s.interval, &timer);
            a.verdict = verdict;
            a.interval = Some(st);
        }
        Method::Sampling => {
            let mut rng = stream(s.seed, stream_index(sys, v));
            let (verdict, st) = verify_sampling(sys, v, &s.sampling, &mut rng, &timer);
            a.verdict = verdict;
            a.sampling = Some(st);
        }
        Method::Auto => unreachable!("auto is resolved by check_candidate"),
    }
    a.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    a
}

pub fn check_candidate(sys: &System, v: &Expr, s: &VerifySettings) -> Checked {
    let mut attempts = Vec::new();
    if s.method == Method::Auto {
        let first = attempt(Method::Sos, sys, v, s);
        let settled = first.verdict.is_certified() || matches!(first.verdict, Verdict::Falsified { .. });
        attempts.push(first);
        if !settled {
            attempts.push(attempt(Method::Interval, sys, v, s));
        }
    } else {
        attempts.push(attempt(s.method, sys, v, s));
    }
    Checked {
        verdict: attempts.last().expect("at least one attempt").verdict.clone(),
        attempts,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub id: String,
    pub n: usize,
    pub method: Method,
    pub status: String,
    pub verdict: Verdict,
    pub wall_ms: f64,
    pub attempts: Vec<Attempt>,
}

/// Verifies every (system, lyapunov) record of `input`, writing one verdict line each.
pub fn verify_file(input: &Path, out: &Path, s: &VerifySettings) -> Result<Vec<VerdictRecord>> {
    let recs = read_records(input)?;
    let pairs = recs
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let missing = || PipelineError::Record {
                path: input.into(),
                line: i + 1,
                message: "record has no lyapunov function".into(),
            };
            let v = r.decode_lyapunov().ok().flatten().ok_or_else(missing)?;
            Ok((r, r.decode_system().expect("validated on read"), v))
        })
        .collect::<Result<Vec<_>>>()?;
    let verdicts: Vec<VerdictRecord> = pairs
        .par_iter()
        .map(|(r, sys, v)| {
            let c = check_candidate(sys, v, s);
            VerdictRecord {
                id: r.id.clone(),
                n: r.n,
                method: s.method,
                status: c.verdict.status().into(),
                wall_ms: c.attempts.iter().map(|a| a.wall_ms).sum(),
                verdict: c.verdict,
                attempts: c.attempts,
            }
        })
        .collect();
    write_jsonl(out, &verdicts)?;
    Ok(verdicts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lyapforge_core::parse::parse_expr_dim;
    use lyapforge_core::score::Condition;

    fn pair(eqs: &[&str], v: &str) -> (System, Expr) {
        let n = eqs.len();
        let sys = System::new(eqs.iter().map(|s| parse_expr_dim(s, n).unwrap()).collect());
        (sys, parse_expr_dim(v, n).unwrap())
    }

    #[test]
    fn auto_certifies_by_sos() {
        let (sys, v) = pair(&["-x0", "-x1"], "x0^2 + x1^2");
        let c = check_candidate(&sys, &v, &VerifySettings::default());
        assert!(c.verdict.is_certified());
        assert_eq!(c.attempts.len(), 1);
        assert!(c.attempts[0].sos.unwrap().decrease.is_some());
    }

    #[test]
    fn auto_falls_back_to_interval() {
        // V is not SOS-certifiable with a quadratic margin but positive away from 0.
        let (sys, v) = pair(&["-x0^3"], "x0^4");
        let s = VerifySettings {
            interval: IntervalConfig {
                radius: 2.0,
                ..IntervalConfig::default()
            },
            ..VerifySettings::default()
        };
        let c = check_candidate(&sys, &v, &s);
        assert_eq!(c.attempts.len(), 2);
        assert!(matches!(c.attempts[0].verdict, Verdict::Rejected { .. }));
        assert!(c.verdict.is_certified(), "{:?}", c.verdict);
    }

    #[test]
    fn unstable_pair_is_negative_everywhere() {
        let (sys, v) = pair(&["x0"], "x0^2");
        for m in [Method::Sos, Method::Interval, Method::Sampling, Method::Auto] {
            let s = VerifySettings {
                method: m,
                ..VerifySettings::default()
            };
            let c = check_candidate(&sys, &v, &s);
            assert!(c.verdict.is_negative(), "{m}: {:?}", c.verdict);
        }
        let s = VerifySettings {
            method: Method::Sampling,
            ..VerifySettings::default()
        };
        assert!(matches!(
            check_candidate(&sys, &v, &s).verdict,
            Verdict::Falsified {
                condition: Condition::Decrease,
                ..
            }
        ));
    }

    #[test]
    fn sos_is_unsupported_off_polynomials() {
        let (sys, v) = pair(&["-sin(x0)"], "1 - cos(x0)");
        let s = VerifySettings {
            method: Method::Sos,
            ..VerifySettings::default()
        };
        assert_eq!(
            check_candidate(&sys, &v, &s).verdict,
            Verdict::Unknown {
                reason: UnknownReason::Unsupported
            }
        );
    }

    #[test]
    fn sampling_is_order_independent() {
        let (sys, v) = pair(&["-x0 + x1", "-x1"], "x0^2 + x1^2");
        let s = VerifySettings {
            method: Method::Sampling,
            ..VerifySettings::default()
        };
        assert_eq!(check_candidate(&sys, &v, &s).verdict, check_candidate(&sys, &v, &s).verdict);
        assert!("bogus".parse::<Method>().is_err());
    }
}

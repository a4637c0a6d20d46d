//! `pbisim check`: method selection and the verdict report.

use std::fmt;

use pbisim_core::oca::{FilterVerdict, Poca};
use pbisim_core::vpda::vpda_decide;
use pbisim_core::{bisim_finite, full_equiv_finite, Config, Error, Oracle, Plts, Ppda};

use crate::args::Method;
use crate::model::{plts_state, ppda_config, Model};
use crate::{CliError, Exit};

/// Bound used by the bounded method when `--n` is not given.
pub const DEFAULT_N: usize = 8;

/// Extra counter headroom for the distance search of the pOCA filter.
const OCA_CAP: u64 = 64;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum UnknownReason {
    /// No applicable method decides the question.
    MethodLimitation,
    /// A deciding method was applicable but refused by a size guard or
    /// exploration budget.
    ResourceGuard,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Verdict {
    Bisimilar,
    /// `level` is the least `n` with the two sides not `~_n`, when known.
    NotBisimilar { level: Option<usize> },
    Unknown(UnknownReason),
}

#[derive(Clone, Debug)]
pub struct Report {
    pub verdict: Verdict,
    pub method: &'static str,
    pub evidence: Vec<String>,
}

impl Report {
    pub fn exit(&self) -> Exit {
        match self.verdict {
            Verdict::Bisimilar => Exit::Success,
            Verdict::NotBisimilar { .. } => Exit::NotBisimilar,
            Verdict::Unknown(UnknownReason::MethodLimitation) => Exit::Unknown,
            Verdict::Unknown(UnknownReason::ResourceGuard) => Exit::ResourceGuard,
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.verdict {
            Verdict::Bisimilar => writeln!(f, "bisimilar")?,
            Verdict::NotBisimilar { level: Some(n) } => writeln!(f, "not-bisimilar (n = {n})")?,
            Verdict::NotBisimilar { level: None } => writeln!(f, "not-bisimilar")?,
            Verdict::Unknown(UnknownReason::MethodLimitation) => writeln!(f, "unknown (method limitation)")?,
            Verdict::Unknown(UnknownReason::ResourceGuard) => writeln!(f, "unknown (resource guard)")?,
        }
        writeln!(f, "method: {}", self.method)?;
        for e in &self.evidence {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

pub fn check(model: &Model, left: &str, right: &str, method: Method, n: Option<usize>, budget: usize) -> Result<Report, CliError> {
    match model {
        Model::Plts(l) => check_plts(l, left, right, method, n),
        Model::Ppda(m) => {
            let c1 = ppda_config(m, left)?;
            let c2 = ppda_config(m, right)?;
            check_ppda(m, &c1, &c2, method, n, budget)
        }
        Model::Afa(_) => Err(CliError::usage("check takes a .plts or .ppda file")),
    }
}

fn check_plts(l: &Plts, left: &str, right: &str, method: Method, n: Option<usize>) -> Result<Report, CliError> {
    let s = plts_state(l, left)?;
    let t = plts_state(l, right)?;
    match method {
        Method::Auto | Method::Finite => {
            let p = bisim_finite(l);
            let mut evidence = vec![format!("{} classes over {} states", p.num_blocks(), l.num_states())];
            let verdict = if p.same_block(s, t) {
                Verdict::Bisimilar
            } else {
                let level = Oracle::new(l).distinguishing_level(&s, &t, l.num_states().max(1));
                if let Some(k) = level {
                    evidence.push(format!("distinguished at level {k}"));
                }
                Verdict::NotBisimilar { level }
            };
            Ok(Report {
                verdict,
                method: "finite",
                evidence,
            })
        }
        Method::Bounded => Ok(bounded(l, &s, &t, n.unwrap_or(DEFAULT_N), Vec::new())),
        Method::Vpda | Method::OcaFilter => Err(CliError::usage("vpda and oca-filter need a .ppda file")),
    }
}

fn bounded<T: pbisim_core::system::ProbSystem>(sys: &T, s: &T::State, t: &T::State, n: usize, mut evidence: Vec<String>) -> Report {
    let oracle = Oracle::new(sys);
    match oracle.distinguishing_level(s, t, n) {
        Some(k) => Report {
            verdict: Verdict::NotBisimilar { level: Some(k) },
            method: "bounded",
            evidence,
        },
        None => {
            evidence.push(format!("~_n holds for every n <= {n}"));
            Report {
                verdict: Verdict::Unknown(UnknownReason::MethodLimitation),
                method: "bounded",
                evidence,
            }
        }
    }
}

fn finite_ppda(m: &Ppda, c1: &Config, c2: &Config, n: Option<usize>, budget: usize) -> Result<Report, Error> {
    let same = full_equiv_finite(m, c1, c2, budget)?;
    let mut evidence = vec![format!("reachable part has at most {budget} states")];
    let verdict = if same {
        Verdict::Bisimilar
    } else {
        let level = Oracle::new(m).distinguishing_level(c1, c2, n.unwrap_or(budget));
        if let Some(k) = level {
            evidence.push(format!("distinguished at level {k}"));
        }
        Verdict::NotBisimilar { level }
    };
    Ok(Report {
        verdict,
        method: "finite",
        evidence,
    })
}

fn vpda_report(m: &Ppda, c1: &Config, c2: &Config, n: Option<usize>) -> Result<Report, Error> {
    let same = vpda_decide(m, c1, c2)?;
    let verdict = if same {
        Verdict::Bisimilar
    } else {
        Verdict::NotBisimilar {
            level: Oracle::new(m).distinguishing_level(c1, c2, n.unwrap_or(DEFAULT_N)),
        }
    };
    Ok(Report {
        verdict,
        method: "vpda",
        evidence: Vec::new(),
    })
}

/// `Ok(None)` when the filter is inconclusive.
fn oca_filter(m: &Ppda, c1: &Config, c2: &Config, evidence: &mut Vec<String>) -> Result<Option<Report>, Error> {
    let poca = Poca::new(m)?;
    let (Some(a), Some(b)) = (poca.counter_config(c1), poca.counter_config(c2)) else {
        return Err(Error::InvalidInput(
            "the pOCA filter needs configurations of the form p I^m Z".into(),
        ));
    };
    match poca.not_bisim_filter(a, b, OCA_CAP) {
        FilterVerdict::NotBisimilar { left, right } => {
            evidence.push(format!("dist_INC: {left} vs {right}"));
            Ok(Some(Report {
                verdict: Verdict::NotBisimilar { level: None },
                method: "oca-filter",
                evidence: std::mem::take(evidence),
            }))
        }
        FilterVerdict::Unknown { left, right } => {
            evidence.push(format!("oca-filter inconclusive, dist_INC: {left} vs {right}"));
            Ok(None)
        }
    }
}

fn check_ppda(m: &Ppda, c1: &Config, c2: &Config, method: Method, n: Option<usize>, budget: usize) -> Result<Report, CliError> {
    match method {
        Method::Finite => Ok(finite_ppda(m, c1, c2, n, budget)?),
        Method::Vpda => Ok(vpda_report(m, c1, c2, n)?),
        Method::Bounded => Ok(bounded(m, c1, c2, n.unwrap_or(DEFAULT_N), Vec::new())),
        Method::OcaFilter => {
            let mut evidence = Vec::new();
            Ok(oca_filter(m, c1, c2, &mut evidence)?.unwrap_or(Report {
                verdict: Verdict::Unknown(UnknownReason::MethodLimitation),
                method: "oca-filter",
                evidence,
            }))
        }
        Method::Auto => auto(m, c1, c2, n, budget),
    }
}

/// Finite exploration, then the vpda procedure, then the pOCA filter, then
/// bounded checking. Each skipped stage leaves a note in the evidence.
fn auto(m: &Ppda, c1: &Config, c2: &Config, n: Option<usize>, budget: usize) -> Result<Report, CliError> {
    let mut evidence = Vec::new();
    let mut guarded = false;
    match finite_ppda(m, c1, c2, n, budget) {
        Ok(r) => return Ok(r),
        Err(e) if e.is_resource_guard() => evidence.push(format!("finite: {e}")),
        Err(e) => return Err(e.into()),
    }
    let class = m.classify();
    if class.vpda {
        match vpda_report(m, c1, c2, n) {
            Ok(mut r) => {
                evidence.append(&mut r.evidence);
                r.evidence = evidence;
                return Ok(r);
            }
            Err(e) if e.is_resource_guard() => {
                guarded = true;
                evidence.push(format!("vpda: {e}"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    if class.is_oca() {
        match oca_filter(m, c1, c2, &mut evidence) {
            Ok(Some(r)) => return Ok(r),
            Ok(None) => {}
            Err(Error::InvalidInput(msg)) => evidence.push(format!("oca-filter: {msg}")),
            Err(e) => return Err(e.into()),
        }
    }
    let mut r = bounded(m, c1, c2, n.unwrap_or(DEFAULT_N), evidence);
    if guarded && matches!(r.verdict, Verdict::Unknown(_)) {
        r.verdict = Verdict::Unknown(UnknownReason::ResourceGuard);
    }
    Ok(r)
}

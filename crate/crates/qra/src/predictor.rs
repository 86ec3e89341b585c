//! Closed-form transition-time asymptotics.
//!
//! Given an elimination trace and model parameters this module produces
//! the leading-order mean of the transition time, the per-step queue
//! coefficients of the critical recursion, and the limit law of the
//! transition time on the scale of its mean. All outputs are leading
//! order; the vanishing corrections of the underlying results surface
//! only as tolerances in the verification harness, never as numbers.

use serde::Serialize;
use std::cmp::Ordering;

use crate::algorithm::{classify_regime, AlgorithmTrace, Regime, RegimeTag};
use crate::error::PredictorError;
use crate::law::LawDescriptor;
use crate::params::ModelParams;

/// Limit law attached to a prediction. The critical regime has no known
/// law, which is a stated gap and not an error.
#[derive(Debug, Clone, PartialEq)]
pub enum LawPrediction {
    Known(LawDescriptor),
    /// The critical-regime law is an open problem.
    CriticalUnavailable,
    /// Degenerate or mixed cases where no single law applies.
    NotPredicted,
}

impl Serialize for LawPrediction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        match self {
            LawPrediction::Known(law) => law.serialize(s),
            LawPrediction::CriticalUnavailable => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("kind", "critical-unavailable")?;
                m.end()
            }
            LawPrediction::NotPredicted => s.serialize_none(),
        }
    }
}

/// Per-step record of a prediction: the step's minimum degree, its
/// minimum-choice prefactor `f`, the critical coefficient `f'` where it
/// applies, and the queue coefficient in force when the step begins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepPrediction {
    pub k: usize,
    pub dbar: usize,
    pub n_choices: usize,
    pub f: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_prime: Option<f64>,
    pub gamma_before: f64,
}

/// Leading-order prediction: mean is `coefficient * r^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionPrediction {
    pub regime: RegimeTag,
    pub coefficient: f64,
    pub exponent: f64,
    pub law: LawPrediction,
    pub per_step: Vec<StepPrediction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TransitionPrediction {
    /// Evaluate the leading-order mean at the given scale parameter.
    pub fn mean_at(&self, r: f64) -> f64 {
        self.coefficient * r.powf(self.exponent)
    }
}

/// `d * B^{-(d-1)}`, the escape constant of a `d`-fork.
fn fork_constant(d: usize, p: &ModelParams) -> f64 {
    d as f64 * p.b.powi(-(d as i32 - 1))
}

/// Prefactor `f` of the step where `n` least-degree forks of degree `d`
/// compete, by the regime of the fork itself.
fn step_prefactor(d: usize, n: usize, p: &ModelParams) -> f64 {
    if d == 0 {
        return 1.0 / n as f64;
    }
    match p.beta.criticality(d) {
        Ordering::Less => 1.0 / n as f64,
        Ordering::Equal => {
            let c2 = fork_constant(d, p);
            let c1 = p.drain_u();
            (c2 + c1) / (n as f64 * c2 + c1)
        }
        Ordering::Greater => 1.0,
    }
}

/// Leading-order mean of the next nucleation time when `n` least-degree
/// forks of degree `d` compete at U-queue level `q_u`, together with the
/// prefactor `f` that was applied.
pub fn fork_mean_nucleation(
    d: usize,
    n: usize,
    q_u: f64,
    p: &ModelParams,
) -> Result<(f64, f64), PredictorError> {
    if d == 0 {
        return Err(PredictorError::DegenerateFork);
    }
    assert!(n >= 1, "need at least one competing fork");
    assert!(q_u > 0.0, "queue level must be positive");
    let f = step_prefactor(d, n, p);
    let mean = match p.beta.criticality(d) {
        Ordering::Less => f * q_u.powf(p.beta.value() * (d as f64 - 1.0)) / fork_constant(d, p),
        Ordering::Equal => f * q_u / (fork_constant(d, p) + p.drain_u()),
        Ordering::Greater => q_u / p.drain_u(),
    };
    Ok((mean, f))
}

/// One row of the updated-queue recursion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaStep {
    pub k: usize,
    pub dbar: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_prime: Option<f64>,
    pub gamma_before: f64,
    pub gamma_after: f64,
}

/// Mean queue coefficients along a trace.
///
/// In the critical regime every step with `dbar = d*` drains the U-queues
/// on scale `r`:
/// `f'_i = gamma_before / (n_i d_i B^{-(d_i-1)} + c - rho_U)` and
/// `gamma_after = gamma_before - (c - rho_U) f'_i`. Everywhere else the
/// queues stay at `gamma_u` to leading order, so the sequence is constant.
pub fn gamma_sequence(
    trace: &AlgorithmTrace,
    p: &ModelParams,
) -> Result<Vec<GammaStep>, PredictorError> {
    let regime = classify_regime(trace.d_star(), &p.beta);
    let drain = p.drain_u();
    let mut gamma = p.gamma_u;
    let mut out = Vec::with_capacity(trace.len());
    for (idx, step) in trace.steps().iter().enumerate() {
        let k = idx + 1;
        let critical_step = regime.tag == RegimeTag::Critical && step.dbar == trace.d_star();
        if critical_step {
            let denom = step.n_choices as f64 * fork_constant(step.dbar, p) + drain;
            let f_prime = gamma / denom;
            let after = gamma - drain * f_prime;
            if after <= 0.0 {
                return Err(PredictorError::NonPositiveGamma {
                    step: k,
                    gamma: after,
                });
            }
            out.push(GammaStep {
                k,
                dbar: step.dbar,
                f_prime: Some(f_prime),
                gamma_before: gamma,
                gamma_after: after,
            });
            gamma = after;
        } else {
            out.push(GammaStep {
                k,
                dbar: step.dbar,
                f_prime: None,
                gamma_before: gamma,
                gamma_after: gamma,
            });
        }
    }
    Ok(out)
}

fn per_step_rows(
    trace: &AlgorithmTrace,
    gammas: &[GammaStep],
    p: &ModelParams,
) -> Vec<StepPrediction> {
    trace
        .steps()
        .iter()
        .zip(gammas)
        .enumerate()
        .map(|(idx, (step, g))| StepPrediction {
            k: idx + 1,
            dbar: step.dbar,
            n_choices: step.n_choices,
            f: step_prefactor(step.dbar, step.n_choices, p),
            f_prime: g.f_prime,
            gamma_before: g.gamma_before,
        })
        .collect()
}

/// Leading-order mean transition time along one admissible path.
pub fn mean_transition(
    trace: &AlgorithmTrace,
    p: &ModelParams,
) -> Result<TransitionPrediction, PredictorError> {
    let d_star = trace.d_star();
    let regime = classify_regime(d_star, &p.beta);
    match regime.tag {
        RegimeTag::Degenerate => {
            let gammas = gamma_sequence(trace, p)?;
            Ok(TransitionPrediction {
                regime: regime.tag,
                coefficient: 0.0,
                exponent: 0.0,
                law: LawPrediction::NotPredicted,
                per_step: per_step_rows(trace, &gammas, p),
                note: Some("O(1), constant not predicted".to_string()),
            })
        }
        RegimeTag::Subcritical => {
            let exponent = p.beta.value() * (d_star as f64 - 1.0);
            let gammas = gamma_sequence(trace, p)?;
            let coefficient: f64 = trace
                .steps()
                .iter()
                .filter(|s| s.dbar == d_star)
                .map(|s| {
                    (1.0 / s.n_choices as f64) * p.gamma_u.powf(exponent)
                        / fork_constant(d_star, p)
                })
                .sum();
            Ok(TransitionPrediction {
                regime: regime.tag,
                coefficient,
                exponent,
                law: law_for_trace(trace, p)?,
                per_step: per_step_rows(trace, &gammas, p),
                note: None,
            })
        }
        RegimeTag::Critical => {
            // Step k contributes f'_k * r, the queue coefficient in force
            // before its nucleation divided by the competing-fork constant.
            let gammas = gamma_sequence(trace, p)?;
            let coefficient: f64 = gammas.iter().filter_map(|g| g.f_prime).sum();
            Ok(TransitionPrediction {
                regime: regime.tag,
                coefficient,
                exponent: 1.0,
                law: LawPrediction::CriticalUnavailable,
                per_step: per_step_rows(trace, &gammas, p),
                note: None,
            })
        }
        RegimeTag::Supercritical => {
            // Path-independent: the mean is the time for the U-queues to
            // drain. Per-step rows stop at the first supercritical fork.
            let prefix = trace.truncate_at_supercritical(&p.beta);
            let gammas = gamma_sequence(&prefix, p)?;
            Ok(TransitionPrediction {
                regime: regime.tag,
                coefficient: p.gamma_u / p.drain_u(),
                exponent: 1.0,
                law: LawPrediction::Known(LawDescriptor::DiracAtOne),
                per_step: per_step_rows(&prefix, &gammas, p),
                note: None,
            })
        }
    }
}

/// Probability-weighted mean over a full admissible enumeration.
pub fn mixture_mean(
    traces: &[AlgorithmTrace],
    p: &ModelParams,
) -> Result<TransitionPrediction, PredictorError> {
    let first = traces.first().ok_or(PredictorError::NoTraces)?;
    for t in traces {
        if t.d_star() != first.d_star() {
            return Err(PredictorError::InconsistentDStar {
                a: first.d_star(),
                b: t.d_star(),
            });
        }
    }
    let mut coefficient = 0.0;
    let mut predictions = Vec::with_capacity(traces.len());
    for t in traces {
        let pred = mean_transition(t, p)?;
        coefficient += t.probability().as_f64() * pred.coefficient;
        predictions.push(pred);
    }
    let shared_law = predictions
        .windows(2)
        .all(|w| w[0].law == w[1].law)
        .then(|| predictions[0].law.clone());
    let regime = predictions[0].regime;
    Ok(TransitionPrediction {
        regime,
        coefficient,
        exponent: predictions[0].exponent,
        law: shared_law.unwrap_or(LawPrediction::NotPredicted),
        per_step: Vec::new(),
        note: Some(format!("mixture over {} admissible paths", traces.len())),
    })
}

/// Limit law of the transition time along a path, on the scale of its
/// mean. Subcritical paths give a hypoexponential over the steps that
/// attain `d*`; supercritical paths concentrate at the mean. The
/// critical law is unknown, which is reported as such rather than as an
/// error; only the degenerate regime is one.
pub fn law_for_trace(
    trace: &AlgorithmTrace,
    p: &ModelParams,
) -> Result<LawPrediction, PredictorError> {
    let d_star = trace.d_star();
    let regime = classify_regime(d_star, &p.beta);
    match regime.tag {
        RegimeTag::Degenerate => Err(PredictorError::DegenerateRegime),
        RegimeTag::Critical => Ok(LawPrediction::CriticalUnavailable),
        RegimeTag::Supercritical => Ok(LawPrediction::Known(LawDescriptor::DiracAtOne)),
        RegimeTag::Subcritical => {
            let f: Vec<f64> = trace
                .steps()
                .iter()
                .filter(|s| s.dbar == d_star)
                .map(|s| 1.0 / s.n_choices as f64)
                .collect();
            let total: f64 = f.iter().sum();
            let rates: Vec<f64> = f.iter().map(|fk| total / fk).collect();
            let law = if rates.len() == 1 {
                // a single significant step is the plain unit exponential
                LawDescriptor::ExponentialUnit
            } else {
                LawDescriptor::hypoexponential(rates)
                    .expect("rates are positive by construction")
            };
            Ok(LawPrediction::Known(law))
        }
    }
}

/// Transition-time prediction for the complete bipartite graph with
/// `m = |U|` nodes on the blocking side and initial U-queues `gamma_u r`.
pub fn complete_bipartite_prediction(
    m: usize,
    p: &ModelParams,
) -> Result<TransitionPrediction, PredictorError> {
    if m <= 1 {
        return Err(PredictorError::DegenerateGraph { m });
    }
    let regime: Regime = classify_regime(m, &p.beta);
    let c2 = fork_constant(m, p);
    let drain = p.drain_u();
    let (coefficient, exponent, law, f_prime) = match regime.tag {
        RegimeTag::Subcritical => {
            let exponent = p.beta.value() * (m as f64 - 1.0);
            (
                p.gamma_u.powf(exponent) / c2,
                exponent,
                LawDescriptor::ExponentialUnit,
                None,
            )
        }
        RegimeTag::Critical => {
            let f_cr = 1.0 / (c2 + drain);
            (
                p.gamma_u * f_cr,
                1.0,
                LawDescriptor::CriticalTruncated { c: drain * f_cr },
                Some(p.gamma_u * f_cr),
            )
        }
        RegimeTag::Supercritical => (
            p.gamma_u / drain,
            1.0,
            LawDescriptor::DiracAtOne,
            None,
        ),
        RegimeTag::Degenerate => unreachable!("m >= 2 was checked"),
    };
    Ok(TransitionPrediction {
        regime: regime.tag,
        coefficient,
        exponent,
        law: LawPrediction::Known(law),
        per_step: vec![StepPrediction {
            k: 1,
            dbar: m,
            n_choices: 1,
            f: 1.0,
            f_prime,
            gamma_before: p.gamma_u,
        }],
        note: None,
    })
}

/// Expected minimum of `n` i.i.d. nucleation times relative to one of
/// them: `1/n` for exponential laws, and
/// `(d B^{-(d-1)} + c - rho_U) / (n d B^{-(d-1)} + c - rho_U)` for the
/// truncated-polynomial law of critical forks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinKind {
    Exponential,
    Polynomial,
}

pub fn iid_min_prefactor(n: usize, d: usize, p: &ModelParams, kind: MinKind) -> f64 {
    assert!(n >= 1 && d >= 1);
    match kind {
        MinKind::Exponential => 1.0 / n as f64,
        MinKind::Polynomial => {
            let c1 = p.drain_u();
            let c2 = fork_constant(d, p);
            (c2 + c1) / (n as f64 * c2 + c1)
        }
    }
}

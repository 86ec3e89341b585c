//! Monte Carlo harness: replication fan-out, empirical statistics,
//! comparisons against the closed-form predictions, and export.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::algorithm::{enumerate_admissible, RegimeTag, DEFAULT_PATH_CAP};
use crate::error::ExperimentError;
use crate::graph::BipartiteGraph;
use crate::law::LawDescriptor;
use crate::params::ModelParams;
use crate::predictor::{complete_bipartite_prediction, gamma_sequence, iid_min_prefactor, law_for_trace, mixture_mean, LawPrediction, MinKind};
use crate::rational::Rational;
use crate::rng::Rng;
use crate::simulator::{simulate, Cap, SimOutcome};

/// Per-activation-order statistics. Replications are bucketed by the
/// observed order; shape and queue checks condition on the bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStat {
    pub order: Vec<String>,
    pub admissible: bool,
    pub observed: usize,
    pub frequency: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_prob: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_tau: Option<f64>,
    /// KS distance of bucket taus over their bucket mean vs the path law.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks: Option<f64>,
    pub snapshots: Vec<SnapshotStat>,
}

/// Mean surviving-U queue level over `r` right after the `k`-th first
/// activation, against the predicted queue coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotStat {
    pub k: usize,
    pub empirical: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<f64>,
}

/// Full provenance of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub graph: String,
    pub params: ModelParams,
    pub n_reps: usize,
    pub base_seed: u64,
    pub cap: Cap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub n_reps: usize,
    pub n_capped: usize,
    pub regime: RegimeTag,
    pub d_star: usize,
    pub empirical_mean: f64,
    pub std_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_mean: Option<f64>,
    /// empirical mean / predicted mean
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    /// Pooled KS of tau over its empirical mean against the predicted
    /// law; present only when one law covers every admissible path.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_distance: Option<f64>,
    pub non_admissible_mass: f64,
    pub paths: Vec<PathStat>,
    /// Hitting times of the non-capped replications, replication order.
    pub taus: Vec<f64>,
    pub late_u_reactivations: u64,
    pub params_echo: ParamsEcho,
}

fn run_replications(
    g: &BipartiteGraph,
    p: &ModelParams,
    n_reps: usize,
    base_seed: u64,
    cap: Cap,
) -> Result<Vec<SimOutcome>, ExperimentError> {
    #[cfg(feature = "parallel")]
    {
        (0..n_reps)
            .into_par_iter()
            .map(|i| simulate(g, p, base_seed + i as u64, Some(cap)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(ExperimentError::from)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n_reps)
            .map(|i| simulate(g, p, base_seed + i as u64, Some(cap)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(ExperimentError::from)
    }
}

/// Run `n_reps` independent replications (seed of replication `i` is
/// `base_seed + i`) and compare them against the predictor.
pub fn run_experiment(
    g: &BipartiteGraph,
    p: &ModelParams,
    n_reps: usize,
    base_seed: u64,
    cap: Option<Cap>,
) -> Result<ExperimentReport, ExperimentError> {
    assert!(n_reps >= 1, "need at least one replication");
    let cap = cap.unwrap_or_else(|| Cap::default_for(p));
    let traces = enumerate_admissible(g, DEFAULT_PATH_CAP)?;
    let mixture = mixture_mean(&traces, p)?;
    let predicted_mean = match mixture.regime {
        RegimeTag::Degenerate => None,
        _ => Some(mixture.mean_at(p.r)),
    };

    let outcomes = run_replications(g, p, n_reps, base_seed, cap)?;
    let done: Vec<&SimOutcome> = outcomes.iter().filter(|o| !o.capped).collect();
    let n_capped = n_reps - done.len();
    if done.is_empty() {
        return Err(ExperimentError::AllCapped { n: n_reps });
    }

    let taus: Vec<f64> = done.iter().map(|o| o.tau).collect();
    let n = taus.len() as f64;
    let empirical_mean = taus.iter().sum::<f64>() / n;
    let variance = taus
        .iter()
        .map(|t| (t - empirical_mean).powi(2))
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    let std_error = (variance / n).sqrt();
    let ratio = predicted_mean.map(|m| empirical_mean / m);

    // The critical law of a general graph is unknown, but for a complete
    // bipartite graph the full trichotomy of laws applies; fall back to
    // it so critical complete-bipartite runs still get a shape check.
    let pooled_law = match &mixture.law {
        LawPrediction::Known(law) => Some(law.clone()),
        _ if g.is_complete_bipartite() && g.u_count() >= 2 => {
            match complete_bipartite_prediction(g.u_count(), p)?.law {
                LawPrediction::Known(law) => Some(law),
                _ => None,
            }
        }
        _ => None,
    };
    let ks_pooled = match &pooled_law {
        Some(law) => {
            let normalized: Vec<f64> = taus.iter().map(|t| t / empirical_mean).collect();
            Some(ks_distance(&normalized, law)?)
        }
        None => None,
    };

    // bucket replications by observed activation order
    let mut buckets: Vec<(Vec<String>, Vec<&SimOutcome>)> = Vec::new();
    for o in &done {
        match buckets.iter_mut().find(|(ord, _)| *ord == o.activation_order) {
            Some((_, reps)) => reps.push(o),
            None => buckets.push((o.activation_order.clone(), vec![o])),
        }
    }

    let overall_regime = mixture.regime;
    let mut paths = Vec::new();
    let mut admissible_count = 0usize;
    for trace in &traces {
        let order: Vec<String> = trace.order().iter().map(|s| s.to_string()).collect();
        let reps = buckets
            .iter()
            .find(|(ord, _)| *ord == order)
            .map(|(_, reps)| reps.as_slice())
            .unwrap_or(&[]);
        admissible_count += reps.len();
        let mean_tau = (!reps.is_empty())
            .then(|| reps.iter().map(|o| o.tau).sum::<f64>() / reps.len() as f64);
        let ks = match (law_for_trace(trace, p), mean_tau) {
            (Ok(LawPrediction::Known(law)), Some(mean)) if reps.len() >= 2 => {
                let normalized: Vec<f64> = reps.iter().map(|o| o.tau / mean).collect();
                Some(ks_distance(&normalized, &law)?)
            }
            _ => None,
        };
        let gammas = gamma_sequence(trace, p)?;
        let mut snapshots = Vec::new();
        for k in 1..=trace.len() {
            let per_rep: Vec<f64> = reps
                .iter()
                .filter_map(|o| {
                    let snap = o.queue_snapshots.get(k - 1)?;
                    if snap.is_empty() {
                        return None;
                    }
                    Some(snap.iter().sum::<f64>() / snap.len() as f64 / p.r)
                })
                .collect();
            if per_rep.is_empty() {
                continue;
            }
            let predicted = match overall_regime {
                RegimeTag::Subcritical | RegimeTag::Critical => {
                    Some(gammas[k - 1].gamma_after)
                }
                _ => None,
            };
            snapshots.push(SnapshotStat {
                k,
                empirical: per_rep.iter().sum::<f64>() / per_rep.len() as f64,
                predicted,
            });
        }
        paths.push(PathStat {
            order,
            admissible: true,
            observed: reps.len(),
            frequency: reps.len() as f64 / n,
            predicted_prob: Some(trace.probability()),
            mean_tau,
            ks,
            snapshots,
        });
    }

    // orders the algorithm cannot produce, sorted for determinism
    let mut strays: Vec<&(Vec<String>, Vec<&SimOutcome>)> = buckets
        .iter()
        .filter(|(ord, _)| !paths.iter().any(|p| &p.order == ord))
        .collect();
    strays.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));
    for (order, reps) in strays {
        paths.push(PathStat {
            order: order.clone(),
            admissible: false,
            observed: reps.len(),
            frequency: reps.len() as f64 / n,
            predicted_prob: None,
            mean_tau: Some(reps.iter().map(|o| o.tau).sum::<f64>() / reps.len() as f64),
            ks: None,
            snapshots: Vec::new(),
        });
    }

    Ok(ExperimentReport {
        n_reps,
        n_capped,
        regime: overall_regime,
        d_star: traces[0].d_star(),
        empirical_mean,
        std_error,
        predicted_mean,
        ratio,
        ks_distance: ks_pooled,
        non_admissible_mass: (done.len() - admissible_count) as f64 / n,
        paths,
        taus,
        late_u_reactivations: done.iter().map(|o| o.late_u_reactivations).sum(),
        params_echo: ParamsEcho {
            graph: g.serialize(),
            params: p.clone(),
            n_reps,
            base_seed,
            cap,
        },
    })
}

/// Sup-norm distance between the sample ECDF and the law's CDF. The
/// degenerate Dirac law works through the same formula: its CDF is the
/// unit step at 1.
pub fn ks_distance(samples: &[f64], law: &LawDescriptor) -> Result<f64, ExperimentError> {
    if samples.is_empty() {
        return Err(ExperimentError::NoSamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in samples"));
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = law.cdf(x.max(0.0))?;
        d = d.max((cdf - i as f64 / n).abs());
        d = d.max((cdf - (i as f64 + 1.0) / n).abs());
    }
    Ok(d)
}

/// CSV rendering of a report, one table per section.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTables {
    pub summary: String,
    pub ecdf: String,
    pub path_freqs: String,
    pub snapshots: String,
}

fn csv_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Lossless JSON export.
pub fn export_json(report: &ExperimentReport) -> Result<String, ExperimentError> {
    serde_json::to_string_pretty(report).map_err(|e| ExperimentError::Export(e.to_string()))
}

/// CSV export for external plotting.
pub fn export_csv(report: &ExperimentReport) -> Result<CsvTables, ExperimentError> {
    let mut summary = String::from("key,value\n");
    for (key, value) in [
        ("n_reps", report.n_reps.to_string()),
        ("n_capped", report.n_capped.to_string()),
        ("regime", report.regime.to_string()),
        ("d_star", report.d_star.to_string()),
        ("empirical_mean", report.empirical_mean.to_string()),
        ("std_error", report.std_error.to_string()),
        ("predicted_mean", csv_opt(report.predicted_mean)),
        ("ratio", csv_opt(report.ratio)),
        ("ks_distance", csv_opt(report.ks_distance)),
        ("non_admissible_mass", report.non_admissible_mass.to_string()),
    ] {
        summary.push_str(&format!("{key},{value}\n"));
    }

    let mut ecdf = String::from("x,ecdf,model_cdf\n");
    let mut normalized: Vec<f64> = report
        .taus
        .iter()
        .map(|t| t / report.empirical_mean)
        .collect();
    normalized.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pooled_law = pooled_law_of(report);
    let n = normalized.len() as f64;
    for (i, x) in normalized.iter().enumerate() {
        let model = match &pooled_law {
            Some(law) => law
                .cdf(x.max(0.0))
                .map(|c| c.to_string())
                .unwrap_or_default(),
            None => String::new(),
        };
        ecdf.push_str(&format!("{x},{},{model}\n", (i as f64 + 1.0) / n));
    }

    let mut path_freqs = String::from("order,admissible,observed_freq,predicted_prob\n");
    for p in &report.paths {
        path_freqs.push_str(&format!(
            "{},{},{},{}\n",
            p.order.join(" "),
            p.admissible,
            p.frequency,
            p.predicted_prob.map(|q| q.to_string()).unwrap_or_default()
        ));
    }

    let mut snapshots = String::from("k,empirical,predicted\n");
    for p in &report.paths {
        if p.snapshots.is_empty() {
            continue;
        }
        snapshots.push_str(&format!("# order: {}\n", p.order.join(" ")));
        for s in &p.snapshots {
            snapshots.push_str(&format!(
                "{},{},{}\n",
                s.k,
                s.empirical,
                csv_opt(s.predicted)
            ));
        }
    }

    Ok(CsvTables {
        summary,
        ecdf,
        path_freqs,
        snapshots,
    })
}

/// Rebuild the pooled law a report was checked against, if any.
fn pooled_law_of(report: &ExperimentReport) -> Option<LawDescriptor> {
    // The report stores the KS value, not the law; recompute it from the
    // echoed inputs the same way run_experiment did.
    let g = BipartiteGraph::parse_with(
        &report.params_echo.graph,
        crate::graph::IsolatedUPolicy::Allow,
    )
    .ok()?;
    let traces = enumerate_admissible(&g, DEFAULT_PATH_CAP).ok()?;
    let p = &report.params_echo.params;
    match mixture_mean(&traces, p).ok()?.law {
        LawPrediction::Known(law) => Some(law),
        _ if g.is_complete_bipartite() && g.u_count() >= 2 => {
            match complete_bipartite_prediction(g.u_count(), p).ok()?.law {
                LawPrediction::Known(law) => Some(law),
                _ => None,
            }
        }
        _ => None,
    }
}

/// One assertion of the built-in oracle suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfTestCheck {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfTestReport {
    pub checks: Vec<SelfTestCheck>,
    pub pass: bool,
}

/// Built-in oracles: sampled minima of i.i.d. nucleation-time laws
/// against the closed-form prefactors (1% tolerance at 10^6 draws), and
/// normalization of representative law descriptors by quadrature.
pub fn self_test(seed: u64) -> SelfTestReport {
    let p = canonical_selftest_params();
    let mut checks = Vec::new();
    let mut rng = Rng::seed_from_u64(seed);
    let draws = 1_000_000usize;

    for n in [2usize, 3, 5] {
        let expected = iid_min_prefactor(n, 1, &p, MinKind::Exponential);
        let law = LawDescriptor::ExponentialUnit;
        let mean = mean_min(&law, n, draws, &mut rng);
        checks.push(check(
            format!("min of {n} iid exponentials / mean of one"),
            mean,
            expected,
            0.01,
        ));
    }

    // critical-truncated variables of a 2-fork: C = 1/5 under the
    // canonical parameters
    let d = 2;
    let c = p.drain_u() / (d as f64 * p.b.powi(-(d as i32 - 1)) + p.drain_u());
    let law = LawDescriptor::CriticalTruncated { c };
    for n in [2usize, 3, 5] {
        let expected = iid_min_prefactor(n, d, &p, MinKind::Polynomial);
        let mean = mean_min(&law, n, draws, &mut rng);
        checks.push(check(
            format!("min of {n} iid truncated-polynomial variables / mean of one"),
            mean,
            expected,
            0.01,
        ));
    }

    for (name, law) in [
        (
            "hypoexponential {3, 3/2} density mass",
            LawDescriptor::hypoexponential(vec![3.0, 1.5]).unwrap(),
        ),
        (
            "hypoexponential {2, 2} density mass",
            LawDescriptor::hypoexponential(vec![2.0, 2.0]).unwrap(),
        ),
        (
            "critical-truncated C=1/7 density mass",
            LawDescriptor::CriticalTruncated { c: 1.0 / 7.0 },
        ),
    ] {
        let hi = law.suggested_x_max() + 30.0;
        let mass = simpson(|x| law.density(x).unwrap_or(0.0), 0.0, hi, 1e-11);
        checks.push(check(name.to_string(), mass, 1.0, 1e-8));
        let mean = simpson(|x| law.survival(x).unwrap_or(0.0), 0.0, hi, 1e-11);
        checks.push(check(format!("{name} (mean)"), mean, 1.0, 1e-8));
    }

    let pass = checks.iter().all(|c| c.pass);
    SelfTestReport { checks, pass }
}

fn canonical_selftest_params() -> ModelParams {
    ModelParams {
        lambda: 0.5,
        mu_u: 1.0,
        mu_v: 1.0,
        c: 1.0,
        b: 1.0,
        beta: crate::params::Exponent::from_ratio(1, 1).unwrap(),
        b_prime: 1.0,
        beta_prime: 2.5,
        gamma_u: 1.0,
        gamma_v: 1.0,
        r: 1000.0,
    }
}

fn check(name: String, value: f64, expected: f64, tolerance: f64) -> SelfTestCheck {
    let pass = (value - expected).abs() <= tolerance * expected.abs().max(1e-300);
    SelfTestCheck {
        name,
        value,
        expected,
        tolerance,
        pass,
    }
}

fn mean_min(law: &LawDescriptor, n: usize, draws: usize, rng: &mut Rng) -> f64 {
    let mut total = 0.0;
    for _ in 0..draws {
        let mut m = f64::INFINITY;
        for _ in 0..n {
            m = m.min(law.sample(rng));
        }
        total += m;
    }
    total / draws as f64
}

fn simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, eps: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64 + Copy>(
        f: F,
        a: f64,
        b: f64,
        fa: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, fa, fm, flm, left, eps / 2.0, depth - 1)
                + rec(f, m, b, fm, fb, frm, right, eps / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fb, fm, whole, eps, 48)
}

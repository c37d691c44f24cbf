//! Batch runs and the per-(scenario, method) summary.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use contact_shield::baselines::MethodId;

use crate::audit::{audit_run, AuditReport};
use crate::run::{run_scenario, RunResult};
use crate::scenario::Scenario;
use crate::SimError;

/// One run of a batch: scenario index, method and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub scenario: usize,
    pub method: MethodId,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub run: RunResult,
    pub audit: Option<AuditReport>,
}

/// Runs `jobs` on a pool of `workers` threads; results come back in job order.
pub fn run_batch(scenarios: &[Scenario], jobs: &[Job], audit: bool, workers: usize) -> Result<Vec<Outcome>, SimError> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<Outcome, SimError>>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1).min(jobs.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(k) else { break };
                let mut scn = scenarios[job.scenario].clone();
                scn.seed = job.seed;
                let outcome = run_scenario(&scn, job.method).and_then(|run| {
                    let audit = if audit { Some(audit_run(&scn, &run)?) } else { None };
                    Ok(Outcome { run, audit })
                });
                *slots[k].lock().expect("no panics while holding the slot") = Some(outcome);
            });
        }
    });
    slots.into_iter().map(|s| s.into_inner().expect("slot lock").expect("every job ran")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scenario: String,
    pub method: MethodId,
    pub runs: usize,
    pub efficiency_mean: f64,
    pub efficiency_std: f64,
    /// Audited energy violations, `None` when the runs were not audited.
    pub violations: Option<usize>,
    pub contact_instants: Option<usize>,
    pub resting_contacts: Option<usize>,
    pub structural_mismatches: usize,
    pub verify_us_mean: Option<f64>,
}

/// Groups outcomes by (scenario, method) in order of first appearance.
pub fn report_rows(outcomes: &[Outcome]) -> Vec<ReportRow> {
    let mut keys: Vec<(String, MethodId)> = Vec::new();
    for o in outcomes {
        let key = (o.run.scenario.clone(), o.run.method);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(scenario, method)| {
            let group: Vec<&Outcome> = outcomes.iter().filter(|o| o.run.scenario == scenario && o.run.method == method).collect();
            let n = group.len() as f64;
            let eff: Vec<f64> = group.iter().map(|o| o.run.efficiency()).collect();
            let mean = eff.iter().sum::<f64>() / n;
            let std = if group.len() > 1 {
                (eff.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            let audited = group.iter().all(|o| o.audit.is_some());
            let sum_audit = |f: fn(&AuditReport) -> usize| {
                audited.then(|| group.iter().map(|o| f(o.audit.as_ref().expect("audited"))).sum())
            };
            let calls: usize = group.iter().map(|o| o.run.verify_calls).sum();
            let time: f64 = group.iter().map(|o| o.run.verify_time.as_secs_f64()).sum();
            ReportRow {
                scenario,
                method,
                runs: group.len(),
                efficiency_mean: mean,
                efficiency_std: std,
                violations: sum_audit(AuditReport::violation_count),
                contact_instants: sum_audit(|a| a.contact_instants),
                resting_contacts: sum_audit(|a| a.resting_contact_instants),
                structural_mismatches: group.iter().map(|o| o.run.structural_mismatches).sum(),
                verify_us_mean: (calls > 0).then(|| 1e6 * time / calls as f64),
            }
        })
        .collect()
}

fn opt(v: Option<usize>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

/// Writes the report as CSV. Timing is wall-clock and therefore only
/// included on request, keeping the default output byte-identical.
pub fn write_report(rows: &[ReportRow], writer: impl Write, timing: bool) -> Result<(), SimError> {
    let mut csv = csv::Writer::from_writer(writer);
    let mut header = vec![
        "scenario",
        "method",
        "runs",
        "efficiency_mean",
        "efficiency_std",
        "violations",
        "contact_instants",
        "resting_contacts",
        "structural_mismatches",
    ];
    if timing {
        header.push("verify_us_mean");
    }
    csv.write_record(&header)?;
    for r in rows {
        let mut row = vec![
            r.scenario.clone(),
            r.method.name().to_owned(),
            r.runs.to_string(),
            format!("{:.3}", r.efficiency_mean),
            format!("{:.3}", r.efficiency_std),
            opt(r.violations),
            opt(r.contact_instants),
            opt(r.resting_contacts),
            r.structural_mismatches.to_string(),
        ];
        if timing {
            row.push(r.verify_us_mean.map_or_else(|| "-".into(), |v| format!("{v:.1}")));
        }
        csv.write_record(&row)?;
    }
    csv.flush().map_err(|e| SimError::io("report", e))?;
    Ok(())
}

/// Fixed-width table of the report for terminal output.
pub fn summary_table(rows: &[ReportRow]) -> String {
    let mut out = format!(
        "{:<20} {:<17} {:>5} {:>12} {:>8} {:>10} {:>9} {:>10}\n",
        "scenario", "method", "runs", "efficiency", "std", "violations", "contacts", "verify_us"
    );
    for r in rows {
        out += &format!(
            "{:<20} {:<17} {:>5} {:>12.2} {:>8.2} {:>10} {:>9} {:>10}\n",
            r.scenario,
            r.method.name(),
            r.runs,
            r.efficiency_mean,
            r.efficiency_std,
            opt(r.violations),
            opt(r.contact_instants),
            r.verify_us_mean.map_or_else(|| "-".into(), |v| format!("{v:.0}")),
        );
    }
    out
}

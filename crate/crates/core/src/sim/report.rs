use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::batch::GroupRun;
use super::metrics::{lowc_rate_per_hour, percent_increment, percent_reduction, Involvement, Likelihood};
use super::{Group, SimConfig};
use crate::encounters::{write_specs, EncounterSpec};
use crate::error::{Error, Result};

/// Footnote carried by every report next to the likelihood column.
pub const LIKELIHOOD_NOTE: &str = "Likelihood bands: Frequent >= 1e-3, Probable [1e-5, 1e-3), Remote [1e-7, 1e-5), \
Extremely Remote [1e-9, 1e-7), Extremely Improbable < 1e-9 per flight hour. The rate divides a per-step \
probability by simulated flight hours, so it is a relative index rather than a true hourly rate.";

/// File names of the comparison tables, in the order they are written.
pub const TABLE_FILES: [&str; 5] = [
    "waiting_status.csv",
    "pilot_command_reception.csv",
    "command_execution.csv",
    "risk_per_flight_hour.csv",
    "trajectory_deviation.csv",
];

/// Hex SHA-256 of the canonical CSV form of an encounter set.
pub fn encounter_set_hash(specs: &[EncounterSpec]) -> Result<String> {
    let mut buf = Vec::new();
    write_specs(&mut buf, specs)?;
    Ok(hex::encode(Sha256::digest(&buf)))
}

/// Aggregates of one group over an encounter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub group: Group,
    pub encounters: usize,
    pub step_samples: usize,
    pub involvement: Involvement,
    /// Encounters with at least one LoWC step.
    pub lowc_encounters: usize,
    pub lowc_steps: usize,
    pub nmac_steps: usize,
    pub p_lowc: f64,
    pub p_nmac: f64,
    pub flight_hours: f64,
    pub lowc_per_flight_hour: f64,
    pub likelihood: Likelihood,
    /// Mean over encounters with a LoWC.
    pub mean_pi: f64,
    pub max_pi: f64,
    /// Per-encounter maximum deviation, averaged over encounters.
    pub mean_deviation_h_m: f64,
    pub mean_deviation_v_m: f64,
    pub blend_exact_fraction: Option<f64>,
    pub blend_axis_fraction: Option<f64>,
    pub blend_unmatched_fraction: Option<f64>,
    pub blend_fallback_fraction: Option<f64>,
    pub pilot_decisions: usize,
    pub pilot_withheld: usize,
    pub commands_received: usize,
    pub commands_late: usize,
    pub config: SimConfig,
}

impl GroupReport {
    pub fn from_run(run: &GroupRun) -> Result<Self> {
        let sums = &run.summaries;
        if sums.is_empty() {
            return Err(Error::Validation("cannot report on an empty batch".into()));
        }
        let n = sums.len();
        let step_samples: usize = sums.iter().map(|s| s.steps).sum();
        let lowc_steps: usize = sums.iter().map(|s| s.lowc_steps).sum();
        let nmac_steps: usize = sums.iter().map(|s| s.nmac_steps).sum();
        let p_lowc = lowc_steps as f64 / step_samples as f64;
        let hours = run.config.params.hours(n);
        let (rate, likelihood) = lowc_rate_per_hour(p_lowc, hours)?;
        let with_lowc: Vec<f64> = sums
            .iter()
            .filter(|s| s.lowc_steps > 0)
            .map(|s| s.penetration_integral)
            .collect();
        let mean = |f: fn(&super::EncounterSummary) -> f64| sums.iter().map(f).sum::<f64>() / n as f64;
        let inv = Involvement::from_summaries(sums);
        Ok(Self {
            group: run.config.group,
            encounters: n,
            step_samples,
            involvement: inv,
            lowc_encounters: with_lowc.len(),
            lowc_steps,
            nmac_steps,
            p_lowc,
            p_nmac: nmac_steps as f64 / step_samples as f64,
            flight_hours: hours,
            lowc_per_flight_hour: rate,
            likelihood,
            mean_pi: if with_lowc.is_empty() {
                0.0
            } else {
                with_lowc.iter().sum::<f64>() / with_lowc.len() as f64
            },
            max_pi: with_lowc.iter().copied().fold(0.0, f64::max),
            mean_deviation_h_m: mean(|s| s.max_deviation_h_m),
            mean_deviation_v_m: mean(|s| s.max_deviation_v_m),
            blend_exact_fraction: inv.blend_exact_fraction(),
            blend_axis_fraction: inv.blend_axis_fraction(),
            blend_unmatched_fraction: inv.blend_unmatched_fraction(),
            blend_fallback_fraction: inv.blend_fallback_fraction(),
            pilot_decisions: sums.iter().map(|s| s.pilot_decisions).sum(),
            pilot_withheld: sums.iter().map(|s| s.pilot_withheld).sum(),
            commands_received: sums.iter().map(|s| s.commands_received).sum(),
            commands_late: sums.iter().map(|s| s.commands_late).sum(),
            config: run.config.clone(),
        })
    }

    /// Count relations that every batch must satisfy.
    pub fn check_consistency(&self) -> Result<()> {
        let inv = &self.involvement;
        let executions = inv.exec_daa_override + inv.exec_pilot + inv.exec_blended + inv.no_wait + inv.wait;
        let fail = |what: &str| Err(Error::Validation(format!("{}: {what}", self.group)));
        if executions > inv.conflict_steps || inv.conflict_steps > self.step_samples {
            return fail("more executions than steps");
        }
        if inv.receptions < inv.exec_pilot + inv.exec_blended {
            return fail("fewer receptions than pilot-derived executions");
        }
        if self.p_nmac > self.p_lowc {
            return fail("P(NMAC) exceeds P(LoWC)");
        }
        if !self.group.is_baseline() && inv.exec_daa_override > 0 {
            return fail("DAA overrode a pilot command under the agent");
        }
        Ok(())
    }
}

/// Reports of several groups over one encounter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub tool_version: String,
    pub encounter_set_hash: String,
    pub encounters: usize,
    pub groups: Vec<GroupReport>,
    pub notes: Vec<String>,
}

/// One row of the cross-group comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub group: Group,
    pub wait: usize,
    pub no_wait: usize,
    pub no_wait_reduction_pct: Option<f64>,
    pub receptions: usize,
    pub reception_increment_pct: Option<f64>,
    pub daa_override: usize,
    pub pilot: usize,
    pub blended: usize,
    pub lowc_per_flight_hour: f64,
    pub likelihood: Likelihood,
    pub mean_deviation_h_m: f64,
    pub mean_deviation_v_m: f64,
}

/// Comparison rows of `groups` against the `reference` group.
pub fn compare(groups: &[GroupReport], reference: Group) -> Result<Vec<ComparisonRow>> {
    let base = groups
        .iter()
        .find(|g| g.group == reference)
        .ok_or_else(|| Error::InvalidConfig(format!("reference group {reference} is not in the reports")))?;
    Ok(groups
        .iter()
        .map(|g| {
            let inv = &g.involvement;
            ComparisonRow {
                group: g.group,
                wait: inv.wait,
                no_wait: inv.no_wait,
                no_wait_reduction_pct: percent_reduction(inv.no_wait as f64, base.involvement.no_wait as f64),
                receptions: inv.receptions,
                reception_increment_pct: percent_increment(
                    inv.receptions as f64,
                    base.involvement.receptions as f64,
                ),
                daa_override: inv.exec_daa_override,
                pilot: inv.exec_pilot,
                blended: inv.exec_blended,
                lowc_per_flight_hour: g.lowc_per_flight_hour,
                likelihood: g.likelihood,
                mean_deviation_h_m: g.mean_deviation_h_m,
                mean_deviation_v_m: g.mean_deviation_v_m,
            }
        })
        .collect())
}

fn pct(v: Option<f64>) -> String {
    v.map(|x| format!("{:.2}", x + 0.0)).unwrap_or_else(|| "-".into())
}

impl BatchReport {
    pub fn new(specs: &[EncounterSpec], runs: &[GroupRun]) -> Result<Self> {
        let groups = runs.iter().map(GroupReport::from_run).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            encounter_set_hash: encounter_set_hash(specs)?,
            encounters: specs.len(),
            groups,
            notes: vec![LIKELIHOOD_NOTE.to_string()],
        })
    }

    pub fn group(&self, group: Group) -> Option<&GroupReport> {
        self.groups.iter().find(|g| g.group == group)
    }

    /// Combines reports over the same encounter set; a group present in
    /// several inputs keeps its last occurrence. Groups come out in
    /// canonical order.
    pub fn merge(reports: impl IntoIterator<Item = BatchReport>) -> Result<Self> {
        let mut it = reports.into_iter();
        let mut out = it
            .next()
            .ok_or_else(|| Error::InvalidConfig("nothing to merge".into()))?;
        let mut by_group: BTreeMap<Group, GroupReport> = out.groups.drain(..).map(|g| (g.group, g)).collect();
        for r in it {
            if r.encounter_set_hash != out.encounter_set_hash {
                return Err(Error::UnpairedBatch(out.encounter_set_hash, r.encounter_set_hash));
            }
            by_group.extend(r.groups.into_iter().map(|g| (g.group, g)));
        }
        out.groups = by_group.into_values().collect();
        Ok(out)
    }

    pub fn check_consistency(&self) -> Result<()> {
        self.groups.iter().try_for_each(GroupReport::check_consistency)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    /// The five comparison tables as `(file name, CSV text)`.
    pub fn tables(&self, reference: Group) -> Result<Vec<(&'static str, String)>> {
        let rows = compare(&self.groups, reference)?;
        let mut out = Vec::new();
        let mut table = |name, header: &[&str], cells: &dyn Fn(&ComparisonRow) -> Vec<String>| -> Result<()> {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(header)?;
            for r in &rows {
                let mut rec = vec![r.group.to_string()];
                rec.extend(cells(r));
                w.write_record(rec)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Validation(e.to_string()))?;
            out.push((name, String::from_utf8(bytes).expect("CSV of UTF-8 fields")));
            Ok(())
        };
        table(
            TABLE_FILES[0],
            &["group", "wait", "no_wait_allocate_to_daa", "percent_reduction"],
            &|r| vec![r.wait.to_string(), r.no_wait.to_string(), pct(r.no_wait_reduction_pct)],
        )?;
        table(
            TABLE_FILES[1],
            &["group", "pilot_commands_received", "percent_increment"],
            &|r| vec![r.receptions.to_string(), pct(r.reception_increment_pct)],
        )?;
        table(
            TABLE_FILES[2],
            &["group", "daa_override", "pilot", "blending"],
            &|r| vec![r.daa_override.to_string(), r.pilot.to_string(), r.blended.to_string()],
        )?;
        table(
            TABLE_FILES[3],
            &["group", "p_lowc_per_flight_hour", "qualitative_likelihood"],
            &|r| vec![format!("{:.3e}", r.lowc_per_flight_hour), r.likelihood.to_string()],
        )?;
        table(
            TABLE_FILES[4],
            &["group", "horizontal_deviation_m", "vertical_deviation_m"],
            &|r| vec![format!("{:.1}", r.mean_deviation_h_m), format!("{:.1}", r.mean_deviation_v_m)],
        )?;
        Ok(out)
    }

    /// Writes the JSON report and the comparison tables into `dir`.
    pub fn write_all(&self, dir: impl AsRef<Path>, reference: Group) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.save_json(dir.join("report.json"))?;
        self.write_tables(dir, reference)
    }

    pub fn write_tables(&self, dir: impl AsRef<Path>, reference: Group) -> Result<()> {
        let dir = dir.as_ref();
        for (name, text) in self.tables(reference)? {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

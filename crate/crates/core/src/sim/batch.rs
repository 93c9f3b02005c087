use rayon::prelude::*;

use super::engine::{run_encounter, EncounterLog, EncounterSummary};
use super::SimConfig;
use crate::encounters::EncounterSpec;
use crate::error::Result;
use crate::mdp::WaitMap;

/// Results of running one group over an encounter set, in encounter order.
#[derive(Debug, Clone)]
pub struct GroupRun {
    pub config: SimConfig,
    pub summaries: Vec<EncounterSummary>,
    /// Full logs; empty when the batch streamed them to a sink instead.
    pub logs: Vec<EncounterLog>,
}

impl GroupRun {
    fn collect(config: &SimConfig, items: Vec<(EncounterSummary, Option<EncounterLog>)>) -> Self {
        let mut summaries = Vec::with_capacity(items.len());
        let mut logs = Vec::new();
        for (s, log) in items {
            summaries.push(s);
            logs.extend(log);
        }
        Self {
            config: config.clone(),
            summaries,
            logs,
        }
    }
}

/// Runs every encounter of `specs` under `cfg` on the current rayon pool
/// and keeps the full logs. Results do not depend on the pool size.
pub fn run_batch(specs: &[EncounterSpec], cfg: &SimConfig, map: Option<&WaitMap>) -> Result<GroupRun> {
    let items = specs
        .par_iter()
        .map(|spec| run_encounter(spec, cfg, map).map(|log| (log.summary, Some(log))))
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupRun::collect(cfg, items))
}

impl GroupRun {
    /// Like [`run_batch`] but hands each log to `sink` and keeps only the
    /// summaries.
    pub fn streamed<F>(specs: &[EncounterSpec], cfg: &SimConfig, map: Option<&WaitMap>, sink: F) -> Result<Self>
    where
        F: Fn(&EncounterLog) -> Result<()> + Sync,
    {
        let items = specs
            .par_iter()
            .map(|spec| {
                let log = run_encounter(spec, cfg, map)?;
                sink(&log)?;
                Ok((log.summary, None))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::collect(cfg, items))
    }
}

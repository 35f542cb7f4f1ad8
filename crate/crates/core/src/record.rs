//! JSON run records written by `pdsearch search`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::GroupTable;
use crate::pds::Params;
use crate::search::{ProposalMode, SearchConfig, SearchOutcome, StopMode};
use crate::verify::{certify, CertificateJson};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub alpha: u64,
    pub base_seed: u64,
    pub max_trials: u64,
    pub stop: StopMode,
    pub proposals: ProposalMode,
    /// Per-pass budgets when a preset schedule set `max_trials`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitRecord {
    pub trial_index: u64,
    pub seed: u64,
    pub certificate: CertificateJson,
}

/// Run-dependent facts. Kept out of the record unless asked for, so that
/// equal inputs give byte-identical records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub workers: usize,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub group_label: String,
    pub params: Params,
    pub config: ConfigEcho,
    pub trials_used: u64,
    pub hits: Vec<HitRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("trial {trial_index} reported zero error but {set:?} failed independent verification")]
pub struct UnverifiedHit {
    pub trial_index: u64,
    pub set: Vec<usize>,
}

impl RunRecord {
    /// Certifies every hit in `outcome` and assembles the record. A hit that
    /// fails certification is an error; it is never written out.
    pub fn from_outcome(
        group: &GroupTable,
        params: Params,
        config: &SearchConfig,
        schedule: Option<Vec<u64>>,
        outcome: &SearchOutcome,
        with_timing: bool,
    ) -> Result<Self, UnverifiedHit> {
        let hits = outcome
            .hits()
            .map(|t| {
                let cert = certify(group, params, &t.final_set);
                if !cert.passed() {
                    return Err(UnverifiedHit {
                        trial_index: t.trial_index,
                        set: t.final_set.clone(),
                    });
                }
                Ok(HitRecord {
                    trial_index: t.trial_index,
                    seed: t.seed,
                    certificate: cert.to_json(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RunRecord {
            group_label: group.label().to_string(),
            params,
            config: ConfigEcho {
                alpha: config.alpha,
                base_seed: config.base_seed,
                max_trials: config.max_trials,
                stop: config.stop_mode,
                proposals: config.proposal_mode,
                schedule,
            },
            trials_used: outcome.summary.trials_used,
            hits,
            timing: with_timing.then_some(Timing {
                workers: config.workers,
                wall_time_ms: outcome.summary.wall_time.as_millis() as u64,
            }),
        })
    }
}

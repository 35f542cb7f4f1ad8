//! First-improvement hill climbing over k-subsets, and the trial harness.
//!
//! A trial starts from a uniform random k-subset of `G - 1` and repeatedly
//! proposes replacing one member by a non-identity element. A proposal that
//! inserts an existing member is invalid. The trial stops when the error hits
//! zero or when `alpha` proposals in a row were invalid or failed to strictly
//! lower the error.
//!
//! Trial `t` draws all of its randomness from a generator seeded with
//! `base_seed + t`, so results do not depend on which worker ran it.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::GroupTable;
use crate::params::{check_feasible, Rejection};
use crate::pds::{Params, SearchState, StateError};

/// Per-trial generator.
pub type TrialRng = ChaCha8Rng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("infeasible parameters {params}: {reason}")]
    Infeasible { params: Params, reason: Rejection },
    #[error("alpha must be at least 1")]
    ZeroAlpha,
    #[error("worker count must be at least 1")]
    ZeroWorkers,
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopMode {
    /// Stop handing out trials once any trial reaches zero error.
    FirstHit,
    /// Run the whole budget.
    CollectAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProposalMode {
    /// Member and replacement drawn uniformly at random, with replacement.
    Random,
    /// Cycle through all `(n-1)k` (slot, element) pairs in a fixed order, so
    /// `alpha = (n-1)k` failures in a row prove a local minimum.
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub alpha: u64,
    pub max_trials: u64,
    pub base_seed: u64,
    pub stop_mode: StopMode,
    pub proposal_mode: ProposalMode,
    pub workers: usize,
    /// Reject parameter sets that fail [`check_feasible`].
    pub require_feasible: bool,
}

impl SearchConfig {
    /// Defaults for `params`: `alpha = (n-1)k`, random proposals, first-hit,
    /// one worker.
    pub fn new(params: Params, max_trials: u64) -> Self {
        SearchConfig {
            alpha: default_alpha(params),
            max_trials,
            base_seed: 0,
            stop_mode: StopMode::FirstHit,
            proposal_mode: ProposalMode::Random,
            workers: 1,
            require_feasible: true,
        }
    }

    pub fn trial_seed(&self, trial_index: u64) -> u64 {
        self.base_seed.wrapping_add(trial_index)
    }

    fn validate(&self, params: Params) -> Result<(), SearchError> {
        if self.alpha == 0 {
            return Err(SearchError::ZeroAlpha);
        }
        if self.workers == 0 {
            return Err(SearchError::ZeroWorkers);
        }
        if self.require_feasible {
            check_feasible(params).map_err(|reason| SearchError::Infeasible { params, reason })?;
        }
        Ok(())
    }
}

/// `(n-1)k`, the number of distinct swap proposals.
pub fn default_alpha(params: Params) -> u64 {
    ((params.n() - 1) * params.k()) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convergence {
    AlphaExhausted,
    ZeroError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_index: u64,
    pub seed: u64,
    pub final_error: i64,
    /// Sorted, 0-indexed.
    pub final_set: Vec<usize>,
    pub proposals_made: u64,
    pub improving_moves: u64,
    pub converged_by: Convergence,
}

impl TrialResult {
    pub fn is_hit(&self) -> bool {
        self.final_error == 0
    }
}

/// A proposed swap. `valid` is false when `incoming` is already a member.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Proposal {
    pub out: usize,
    pub incoming: usize,
    pub valid: bool,
}

/// Draws the member to remove uniformly from `D` and the replacement
/// uniformly from `G - 1`.
pub fn propose_swap<R: Rng + ?Sized>(state: &SearchState<'_>, rng: &mut R) -> Proposal {
    let roster = state.roster();
    let out = roster[rng.random_range(0..roster.len())];
    let n = state.group().order();
    let mut incoming = rng.random_range(0..n - 1);
    if incoming >= state.group().identity() {
        incoming += 1;
    }
    Proposal {
        out,
        incoming,
        valid: !state.contains(incoming),
    }
}

/// Deterministic proposal order for [`ProposalMode::Sweep`]: step `t` pairs
/// roster slot `t / (n-1)` with the `(t mod (n-1))`-th non-identity element.
#[derive(Debug, Clone, Default)]
pub struct Sweep {
    step: u64,
}

impl Sweep {
    pub fn next(&mut self, state: &SearchState<'_>) -> Proposal {
        let n = state.group().order() as u64;
        let k = state.roster().len() as u64;
        let t = self.step % ((n - 1) * k);
        self.step = self.step.wrapping_add(1);
        let out = state.roster()[(t / (n - 1)) as usize];
        let mut incoming = (t % (n - 1)) as usize;
        if incoming >= state.group().identity() {
            incoming += 1;
        }
        Proposal {
            out,
            incoming,
            valid: !state.contains(incoming),
        }
    }
}

/// Uniform random k-subset of `G - 1`, by partial shuffle.
pub fn random_subset<R: Rng + ?Sized>(group: &GroupTable, k: usize, rng: &mut R) -> Vec<usize> {
    let mut pool: Vec<usize> = group.non_identity().collect();
    let (chosen, _) = pool.partial_shuffle(rng, k);
    chosen.to_vec()
}

/// Counters from one climb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClimbStats {
    pub proposals: u64,
    pub improving_moves: u64,
}

/// Hill-climbs `state` in place until zero error or `alpha` consecutive
/// failed proposals.
pub fn climb<R: Rng + ?Sized>(
    state: &mut SearchState<'_>,
    rng: &mut R,
    alpha: u64,
    mode: ProposalMode,
) -> ClimbStats {
    let mut stats = ClimbStats::default();
    let mut sweep = Sweep::default();
    let mut failures = 0u64;
    while state.error() > 0 && failures < alpha {
        let p = match mode {
            ProposalMode::Random => propose_swap(state, rng),
            ProposalMode::Sweep => sweep.next(state),
        };
        stats.proposals += 1;
        if !p.valid {
            failures += 1;
            continue;
        }
        if state.swap_delta_unchecked(p.out, p.incoming) < 0 {
            state.apply_swap_unchecked(p.out, p.incoming);
            stats.improving_moves += 1;
            failures = 0;
        } else {
            failures += 1;
        }
    }
    stats
}

/// Runs trial `trial_index` from a random initial set.
pub fn run_trial(
    group: &GroupTable,
    params: Params,
    config: &SearchConfig,
    trial_index: u64,
) -> Result<TrialResult, SearchError> {
    config.validate(params)?;
    trial_with(
        group,
        params,
        config,
        trial_index,
        &|_, rng: &mut TrialRng| random_subset(group, params.k(), rng),
    )
}

fn trial_with<F>(
    group: &GroupTable,
    params: Params,
    config: &SearchConfig,
    trial_index: u64,
    initial: &F,
) -> Result<TrialResult, SearchError>
where
    F: Fn(u64, &mut TrialRng) -> Vec<usize> + ?Sized,
{
    let seed = config.trial_seed(trial_index);
    let mut rng = TrialRng::seed_from_u64(seed);
    let start = initial(trial_index, &mut rng);
    let mut state = SearchState::new(group, params, &start)?;
    let stats = climb(&mut state, &mut rng, config.alpha, config.proposal_mode);
    let final_error = state.error();
    Ok(TrialResult {
        trial_index,
        seed,
        final_error,
        final_set: state.sorted_members(),
        proposals_made: stats.proposals,
        improving_moves: stats.improving_moves,
        converged_by: if final_error == 0 {
            Convergence::ZeroError
        } else {
            Convergence::AlphaExhausted
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSummary {
    pub trials_used: u64,
    pub hits: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Completed trials in trial-index order.
    pub trials: Vec<TrialResult>,
    pub summary: SearchSummary,
}

impl SearchOutcome {
    pub fn hits(&self) -> impl Iterator<Item = &TrialResult> {
        self.trials.iter().filter(|t| t.is_hit())
    }
}

/// Runs up to `config.max_trials` independent trials on `config.workers`
/// threads.
pub fn run_search(
    group: &GroupTable,
    params: Params,
    config: &SearchConfig,
) -> Result<SearchOutcome, SearchError> {
    let k = params.k();
    run_search_with(group, params, config, move |_, rng: &mut TrialRng| {
        random_subset(group, k, rng)
    })
}

/// As [`run_search`], with `initial(trial_index, rng)` choosing each trial's
/// starting set.
pub fn run_search_with<F>(
    group: &GroupTable,
    params: Params,
    config: &SearchConfig,
    initial: F,
) -> Result<SearchOutcome, SearchError>
where
    F: Fn(u64, &mut TrialRng) -> Vec<usize> + Sync,
{
    config.validate(params)?;
    if params.n() != group.order() {
        return Err(StateError::OrderMismatch {
            params: params.n(),
            group: group.order(),
        }
        .into());
    }
    let started = Instant::now();
    let next = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let sink: Mutex<Vec<TrialResult>> = Mutex::new(Vec::new());
    let failure: Mutex<Option<SearchError>> = Mutex::new(None);
    let first_hit = config.stop_mode == StopMode::FirstHit;
    let workers = config
        .workers
        .min(usize::try_from(config.max_trials).unwrap_or(usize::MAX))
        .max(1);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if stop.load(Ordering::Acquire) {
                    break;
                }
                let t = next.fetch_add(1, Ordering::Relaxed);
                if t >= config.max_trials {
                    break;
                }
                match trial_with(group, params, config, t, &initial) {
                    Ok(result) => {
                        let hit = result.is_hit();
                        sink.lock().unwrap().push(result);
                        if hit && first_hit {
                            stop.store(true, Ordering::Release);
                        }
                    }
                    Err(e) => {
                        failure.lock().unwrap().get_or_insert(e);
                        stop.store(true, Ordering::Release);
                    }
                }
            });
        }
    });

    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let mut trials = sink.into_inner().unwrap();
    trials.sort_by_key(|t| t.trial_index);
    let hits = trials.iter().filter(|t| t.is_hit()).count() as u64;
    Ok(SearchOutcome {
        summary: SearchSummary {
            trials_used: trials.len() as u64,
            hits,
            wall_time: started.elapsed(),
        },
        trials,
    })
}

/// Per-pass trial budgets by group order, following the schedule used for
/// the original sweep. `srg_known` says whether an SRG with these parameters
/// is already known to exist; above order 144 only open cases were searched.
/// Returns `None` outside the schedule.
pub fn schedule_preset(n: usize, k: usize, srg_known: bool) -> Option<Vec<u64>> {
    let sq = (n as u64) * (n as u64);
    match n {
        0 | 1 => None,
        n if n < 144 => Some(vec![5 * sq]),
        144 if k < 34 => Some(vec![sq]),
        144 => Some(vec![sq, 2 * sq, 2 * sq]),
        _ if srg_known => None,
        145..=161 => Some(vec![2 * sq]),
        162..=185 => Some(vec![2 * sq, 2 * sq]),
        216 | 217 => None,
        186..=238 => Some(vec![2 * sq]),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::cyclic_group;
    use crate::verify::verify_pds;

    fn p(n: usize, k: usize, l: usize, m: usize) -> Params {
        Params::new(n, k, l, m).unwrap()
    }

    #[test]
    fn presets() {
        assert_eq!(schedule_preset(100, 10, true), Some(vec![50_000]));
        assert_eq!(schedule_preset(144, 30, true), Some(vec![20_736]));
        assert_eq!(
            schedule_preset(144, 52, true),
            Some(vec![20_736, 41_472, 41_472])
        );
        assert_eq!(schedule_preset(147, 66, false), Some(vec![2 * 147 * 147]));
        assert_eq!(schedule_preset(147, 66, true), None);
        assert_eq!(schedule_preset(170, 10, false), Some(vec![57_800, 57_800]));
        assert_eq!(schedule_preset(216, 10, false), None);
        assert_eq!(schedule_preset(238, 10, false), Some(vec![2 * 238 * 238]));
        assert_eq!(schedule_preset(239, 10, false), None);
        assert_eq!(schedule_preset(1, 0, false), None);
    }

    #[test]
    fn random_subset_avoids_identity() {
        let z = cyclic_group(10).unwrap();
        let mut rng = TrialRng::seed_from_u64(3);
        for _ in 0..200 {
            let s = random_subset(&z, 9, &mut rng);
            assert_eq!(s.len(), 9);
            assert!(!s.contains(&0));
        }
    }

    #[test]
    fn valid_proposal_rate_near_full_set() {
        // D = G - 1 minus one element: only one of the n-1 replacements is valid.
        let z = cyclic_group(11).unwrap();
        let pr = p(11, 9, 0, 0);
        let state = SearchState::new(&z, pr, &[1, 2, 3, 4, 5, 6, 7, 8, 9]).unwrap();
        let mut rng = TrialRng::seed_from_u64(11);
        let draws = 100_000;
        let valid = (0..draws)
            .filter(|_| {
                let prop = propose_swap(&state, &mut rng);
                if prop.valid {
                    assert_ne!(prop.out, prop.incoming);
                }
                prop.valid
            })
            .count();
        let rate = valid as f64 / draws as f64;
        assert!((rate - 0.1).abs() < 0.005, "rate {rate}");
    }

    #[test]
    fn proposals_are_reproducible() {
        let z = cyclic_group(13).unwrap();
        let state = SearchState::new(&z, p(13, 6, 2, 3), &[1, 2, 3, 4, 5, 6]).unwrap();
        let draw = |seed| {
            let mut rng = TrialRng::seed_from_u64(seed);
            (0..50)
                .map(|_| propose_swap(&state, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn sweep_covers_every_neighbour() {
        let z = cyclic_group(7).unwrap();
        let state = SearchState::new(&z, p(7, 3, 0, 1), &[1, 2, 4]).unwrap();
        let mut sweep = Sweep::default();
        let mut seen = std::collections::HashSet::new();
        for _ in 0..18 {
            let prop = sweep.next(&state);
            seen.insert((prop.out, prop.incoming));
        }
        assert_eq!(seen.len(), 18);
        assert!(seen.iter().all(|&(o, i)| [1, 2, 4].contains(&o) && i != 0));
    }

    #[test]
    fn already_solved_state_returns_immediately() {
        let z5 = cyclic_group(5).unwrap();
        let pr = p(5, 2, 0, 1);
        let mut state = SearchState::new(&z5, pr, &[1, 4]).unwrap();
        let mut rng = TrialRng::seed_from_u64(0);
        let stats = climb(
            &mut state,
            &mut rng,
            default_alpha(pr),
            ProposalMode::Random,
        );
        assert_eq!(stats, ClimbStats::default());
    }

    #[test]
    fn trials_are_deterministic() {
        let z13 = cyclic_group(13).unwrap();
        let pr = p(13, 6, 2, 3);
        let mut cfg = SearchConfig::new(pr, 1);
        cfg.base_seed = 77;
        for t in 0..20 {
            let a = run_trial(&z13, pr, &cfg, t).unwrap();
            let b = run_trial(&z13, pr, &cfg, t).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.seed, 77 + t);
            assert_eq!(a.is_hit(), a.converged_by == Convergence::ZeroError);
        }
    }

    #[test]
    fn alpha_exhausted_states_are_local_minima_under_sweep() {
        let z5 = cyclic_group(5).unwrap();
        let pr = p(5, 2, 0, 1);
        let mut cfg = SearchConfig::new(pr, 1);
        cfg.proposal_mode = ProposalMode::Sweep;
        for t in 0..200 {
            let r = run_trial(&z5, pr, &cfg, t).unwrap();
            if r.is_hit() {
                continue;
            }
            let state = SearchState::new(&z5, pr, &r.final_set).unwrap();
            for &out in &r.final_set {
                for inc in 1..5 {
                    if state.contains(inc) {
                        continue;
                    }
                    let swapped: Vec<usize> = r
                        .final_set
                        .iter()
                        .map(|&x| if x == out { inc } else { x })
                        .collect();
                    let e = SearchState::new(&z5, pr, &swapped).unwrap().error();
                    assert!(e >= r.final_error);
                }
            }
        }
    }

    /// Each applied move lowers the error by at least one, so the number of
    /// moves is bounded by the drop from the initial error.
    #[test]
    fn moves_strictly_descend() {
        let z = cyclic_group(29).unwrap();
        let pr = p(29, 14, 6, 7);
        let cfg = SearchConfig::new(pr, 1);
        for t in 0..50 {
            let r = run_trial(&z, pr, &cfg, t).unwrap();
            let mut rng = TrialRng::seed_from_u64(cfg.trial_seed(t));
            let start = random_subset(&z, 14, &mut rng);
            let initial = SearchState::new(&z, pr, &start).unwrap().error();
            assert!(r.final_error <= initial);
            assert!(r.improving_moves as i64 <= initial - r.final_error);
        }
    }

    #[test]
    fn empty_budget() {
        let z13 = cyclic_group(13).unwrap();
        let pr = p(13, 6, 2, 3);
        let out = run_search(&z13, pr, &SearchConfig::new(pr, 0)).unwrap();
        assert!(out.trials.is_empty());
        assert_eq!(out.summary.trials_used, 0);
        assert_eq!(out.summary.hits, 0);
    }

    #[test]
    fn config_errors() {
        let z13 = cyclic_group(13).unwrap();
        let pr = p(13, 6, 2, 3);
        let mut cfg = SearchConfig::new(pr, 10);
        cfg.alpha = 0;
        assert_eq!(
            run_search(&z13, pr, &cfg).unwrap_err(),
            SearchError::ZeroAlpha
        );
        let bad = p(13, 6, 2, 4);
        assert!(matches!(
            run_search(&z13, bad, &SearchConfig::new(bad, 10)),
            Err(SearchError::Infeasible { .. })
        ));
        let mut cfg = SearchConfig::new(bad, 10);
        cfg.require_feasible = false;
        let out = run_search(&z13, bad, &cfg).unwrap();
        assert_eq!(out.summary.hits, 0);
    }

    #[test]
    fn planted_hit_stops_early() {
        let z13 = cyclic_group(13).unwrap();
        let pr = p(13, 6, 2, 3);
        let paley = vec![1, 3, 4, 9, 10, 12];
        let plant = |t: u64, rng: &mut TrialRng| {
            if t == 0 {
                paley.clone()
            } else {
                random_subset(&z13, 6, rng)
            }
        };

        let cfg = SearchConfig::new(pr, 10_000);
        let out = run_search_with(&z13, pr, &cfg, plant).unwrap();
        assert_eq!(out.trials.len(), 1);
        assert_eq!(out.summary.hits, 1);
        assert_eq!(out.trials[0].proposals_made, 0);
        assert_eq!(out.trials[0].final_set, paley);

        let mut cfg = SearchConfig::new(pr, 10_000);
        cfg.workers = 4;
        let out = run_search_with(&z13, pr, &cfg, plant).unwrap();
        assert!(out.trials[0].is_hit());
        assert!(out.summary.trials_used <= 1 + cfg.workers as u64);
        assert_eq!(out.summary.hits as usize, out.hits().count());
        for hit in out.hits() {
            assert!(verify_pds(&z13, pr, &hit.final_set).passed());
        }
    }
}

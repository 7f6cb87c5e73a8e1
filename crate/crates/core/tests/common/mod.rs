//! Test-only oracles for the channel manager.
//!
//! Co-channel geometry is recomputed here from raw cell centers rather than
//! read from the topology's tier index, and grant feasibility is decided by
//! exhaustive enumeration.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use chanborrow_core::topology::{distance_m, Point};
use chanborrow_core::{
    build_topology, BandTag, BorrowPlan, CellId, ChannelId, ChannelPool, ChannelState,
    NeutralizeAction, Strategy, Topology, TopologyParams, REFERENCE_CELL,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn miniature(channels: u16) -> ChannelPool {
    let topo = build_topology(&TopologyParams {
        cell_radius_m: 1000.0,
        channel_count_per_band: channels,
        bs_height_m: 100.0,
        tx_power_w: 1500.0,
    })
    .unwrap();
    ChannelPool::new(Arc::new(topo), 0.5).unwrap()
}

/// Hex neighbours by center spacing √3·R.
pub fn adjacent_by_geometry(topo: &Topology, cell: CellId) -> Vec<CellId> {
    let me = topo.cell(cell).unwrap();
    let spacing = 3f64.sqrt() * me.radius_m;
    topo.cells()
        .iter()
        .filter(|o| (distance_m(o.center, me.center) - spacing).abs() < 1e-6 * spacing)
        .map(|o| o.id)
        .collect()
}

/// Same-band cells at the smallest co-channel distance from `cell`.
pub fn nearest_cochannel_by_geometry(topo: &Topology, cell: CellId, band: BandTag) -> Vec<CellId> {
    let me = topo.cell(cell).unwrap();
    let same: Vec<(f64, CellId)> = topo
        .cells()
        .iter()
        .filter(|o| o.id != cell && o.band.tag == band)
        .map(|o| (distance_m(o.center, me.center), o.id))
        .collect();
    let min = same.iter().map(|(d, _)| *d).fold(f64::INFINITY, f64::min);
    let mut out: Vec<CellId> = same
        .into_iter()
        .filter(|(d, _)| (d - min).abs() < 1e-6 * min)
        .map(|(_, id)| id)
        .collect();
    out.sort();
    out
}

/// Neutralization an oracle expects for one co-channel copy, or `None` if
/// the strategy cannot handle that copy.
pub fn expected_action(strategy: Strategy, copy: ChannelState) -> Option<NeutralizeAction> {
    use ChannelState as S;
    use NeutralizeAction as A;
    match (strategy, copy) {
        (_, S::Blocked) => Some(A::Block),
        (Strategy::Blocking | Strategy::Auto, S::Free) => Some(A::Block),
        (Strategy::Bifurcation, S::Free | S::Occupied { .. }) => Some(A::BifurcateInnerOnly),
        (Strategy::Auto, S::Occupied { .. }) => Some(A::BifurcateInnerOnly),
        _ => None,
    }
}

/// Every (donor, channel) pair that could legally be granted to the
/// reference cell right now.
pub fn feasible_pairs(pool: &ChannelPool, strategy: Strategy) -> BTreeSet<(CellId, ChannelId)> {
    let topo = pool.topology();
    let ref_band = topo.cell(REFERENCE_CELL).unwrap().band.tag;
    let mut out = BTreeSet::new();
    for donor in adjacent_by_geometry(topo, REFERENCE_CELL) {
        let band = topo.cell(donor).unwrap().band.tag;
        if band == ref_band {
            continue;
        }
        let others: Vec<CellId> = nearest_cochannel_by_geometry(topo, REFERENCE_CELL, band)
            .into_iter()
            .filter(|c| *c != donor)
            .collect();
        for index in 0..topo.channel_count() {
            let ch = ChannelId::new(band, index);
            if pool.state(donor, ch).unwrap() != Some(ChannelState::Free)
                || pool.is_inner_only(donor, ch).unwrap()
                || pool.state(REFERENCE_CELL, ch).unwrap().is_some()
            {
                continue;
            }
            let ok = strategy == Strategy::None
                || others.iter().all(|c| {
                    expected_action(strategy, pool.state(*c, ch).unwrap().unwrap()).is_some()
                });
            if ok {
                out.insert((donor, ch));
            }
        }
    }
    out
}

/// Largest grant achievable: brute force over all subsets of feasible
/// pairs whose channel ids are distinct.
pub fn max_feasible_grant(pairs: &BTreeSet<(CellId, ChannelId)>) -> usize {
    let pairs: Vec<_> = pairs.iter().copied().collect();
    assert!(pairs.len() <= 20, "miniature instances only");
    let mut best = 0;
    for mask in 0u32..(1 << pairs.len()) {
        let chosen: Vec<_> = (0..pairs.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| pairs[i])
            .collect();
        let distinct: BTreeSet<ChannelId> = chosen.iter().map(|(_, c)| *c).collect();
        if distinct.len() == chosen.len() {
            best = best.max(chosen.len());
        }
    }
    best
}

/// Cross-checks a plan against the brute-force planner. Returns a
/// description of the first disagreement.
pub fn check_plan(
    pool: &ChannelPool,
    plan: &BorrowPlan,
    needed: usize,
    strategy: Strategy,
) -> Result<(), String> {
    let pairs = feasible_pairs(pool, strategy);
    let best = max_feasible_grant(&pairs);
    if plan.granted_count() != needed.min(best) {
        return Err(format!(
            "granted {} but brute force allows {} (needed {needed})",
            plan.granted_count(),
            best
        ));
    }
    let mut seen = BTreeSet::new();
    for (donor, ch) in plan.granted() {
        if !pairs.contains(&(donor, ch)) {
            return Err(format!("grant {ch} from {donor} is infeasible"));
        }
        if !seen.insert(ch) {
            return Err(format!("{ch} granted twice"));
        }
    }
    let topo = pool.topology();
    let mut expected = BTreeMap::new();
    if strategy != Strategy::None {
        for (donor, ch) in plan.granted() {
            for cell in nearest_cochannel_by_geometry(topo, REFERENCE_CELL, ch.band) {
                if cell == donor {
                    continue;
                }
                let copy = pool.state(cell, ch).unwrap().unwrap();
                expected.insert((cell, ch), expected_action(strategy, copy).unwrap());
            }
        }
    }
    let mut actual = BTreeMap::new();
    for n in &plan.neutralizations {
        if actual.insert((n.cell, n.channel), n.action).is_some() {
            return Err(format!(
                "duplicate neutralization of {} at {}",
                n.channel, n.cell
            ));
        }
    }
    if actual != expected {
        return Err(format!(
            "neutralizations {actual:?} != expected {expected:?}"
        ));
    }
    Ok(())
}

fn random_point_in(pool: &ChannelPool, cell: CellId, rng: &mut ChaCha8Rng) -> Point {
    let c = pool.topology().cell(cell).unwrap();
    loop {
        let p = Point::new(
            c.center.x + rng.random_range(-c.radius_m..c.radius_m),
            c.center.y + rng.random_range(-c.radius_m..c.radius_m),
        );
        if c.contains(p) {
            return p;
        }
    }
}

#[derive(Debug, Default)]
pub struct StressStats {
    pub admits: u64,
    pub releases: u64,
    pub borrows: u64,
    pub channels_borrowed: u64,
    pub blocked_admissions: u64,
    pub copies_blocked: u64,
    pub copies_bifurcated: u64,
    pub episodes: u64,
}

/// Drives `events` random admit/release/borrow steps on the central
/// cluster of miniature pools, auditing every invariant after each step.
/// Lent channels are never returned, so a fresh pool is started every
/// `episode` steps to keep borrowing reachable.
pub fn stress(
    channels: u16,
    events: usize,
    episode: usize,
    seed: u64,
) -> Result<StressStats, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = miniature(channels);
    let mut active: Vec<u64> = Vec::new();
    let mut next_call = 0u64;
    let mut stats = StressStats {
        episodes: 1,
        ..StressStats::default()
    };

    for step in 0..events {
        if step > 0 && step % episode == 0 {
            pool = miniature(channels);
            active.clear();
            stats.episodes += 1;
        }
        let pool = &mut pool;
        let roll: f64 = rng.random();
        if roll < 0.5 {
            let cell = if rng.random_bool(0.4) {
                REFERENCE_CELL
            } else {
                CellId(rng.random_range(1..=7))
            };
            let pos = random_point_in(pool, cell, &mut rng);
            let before: BTreeMap<ChannelId, ChannelState> = pool.channels(cell).unwrap().collect();
            let verdict = pool
                .admit_call(cell, chanborrow_core::CallId(next_call), pos, step as f64)
                .map_err(|e| e.to_string())?;
            match verdict {
                chanborrow_core::Admission::Assigned(ch) => {
                    match before.get(&ch) {
                        Some(ChannelState::Free)
                        | Some(ChannelState::Borrowed {
                            occupancy: chanborrow_core::Occupancy::Free,
                            ..
                        }) => {}
                        other => {
                            return Err(format!("step {step}: assigned {ch} from state {other:?}"))
                        }
                    }
                    active.push(next_call);
                    stats.admits += 1;
                }
                chanborrow_core::Admission::Blocked => stats.blocked_admissions += 1,
            }
            next_call += 1;
        } else if roll < 0.85 {
            if !active.is_empty() {
                let call = active.swap_remove(rng.random_range(0..active.len()));
                pool.release_call(chanborrow_core::CallId(call), step as f64)
                    .map_err(|e| e.to_string())?;
                stats.releases += 1;
            }
        } else if pool.free_native_count(REFERENCE_CELL).unwrap() == 0 {
            let strategy = Strategy::ALL[rng.random_range(0..4)];
            let needed = rng.random_range(0..=4);
            let plan = pool
                .request_borrow(REFERENCE_CELL, needed, strategy)
                .map_err(|e| e.to_string())?;
            check_plan(pool, &plan, needed, strategy).map_err(|e| format!("step {step}: {e}"))?;
            pool.apply_plan(&plan).map_err(|e| e.to_string())?;
            stats.borrows += 1;
            stats.channels_borrowed += plan.granted_count() as u64;
            for n in &plan.neutralizations {
                match n.action {
                    NeutralizeAction::Block => stats.copies_blocked += 1,
                    NeutralizeAction::BifurcateInnerOnly => stats.copies_bifurcated += 1,
                }
            }
        }

        pool.check_invariants()
            .map_err(|e| format!("step {step}: {e}"))?;
        if pool.active_calls() != active.len() {
            return Err(format!(
                "step {step}: pool has {} calls, counter {}",
                pool.active_calls(),
                active.len()
            ));
        }
        for alloc in pool.allocations() {
            let borrowed = pool
                .channels(REFERENCE_CELL)
                .unwrap()
                .filter(|(c, s)| c.band == alloc.band && matches!(s, ChannelState::Borrowed { .. }))
                .count();
            if !(alloc.used <= alloc.inner_quota && usize::from(alloc.inner_quota) <= borrowed) {
                return Err(format!(
                    "step {step}: quota {alloc:?} exceeds borrowed sub-band {borrowed}"
                ));
            }
        }
    }
    Ok(stats)
}

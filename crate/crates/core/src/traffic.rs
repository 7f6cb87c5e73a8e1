//! Erlang call workload: Poisson arrivals, exponential holding times and
//! users placed uniformly over their cell. Also drives a [`ChannelPool`]
//! through an event list.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::channel::{Admission, BorrowPlan, CallId, ChannelPool, Declination, Strategy};
use crate::error::{invalid, Result};
use crate::topology::{Cell, CellId, Point, Topology};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    Arrival { position: Point },
    Departure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CallEvent {
    pub kind: EventKind,
    pub time: f64,
    pub cell: CellId,
    pub call: CallId,
}

impl CallEvent {
    fn order(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.call.cmp(&other.call))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficProfile {
    /// Calls per second, indexed by `cell id - 1`.
    pub arrival_rates: Vec<f64>,
    pub mean_holding_s: f64,
    pub seed: u64,
}

impl TrafficProfile {
    /// Offered load of `reference_factor × channels` Erlang at `reference`
    /// and `other_factor × channels` everywhere else.
    pub fn from_load_factors(
        topo: &Topology,
        reference: CellId,
        reference_factor: f64,
        other_factor: f64,
        mean_holding_s: f64,
        seed: u64,
    ) -> Self {
        let channels = f64::from(topo.channel_count());
        let arrival_rates = topo
            .cells()
            .iter()
            .map(|c| {
                let factor = if c.id == reference {
                    reference_factor
                } else {
                    other_factor
                };
                factor * channels / mean_holding_s
            })
            .collect();
        Self {
            arrival_rates,
            mean_holding_s,
            seed,
        }
    }

    pub fn validate(&self, topo: &Topology) -> Result<()> {
        if self.arrival_rates.len() != topo.len() {
            return Err(invalid(
                "traffic.arrival_rates",
                format!(
                    "expected {} rates, got {}",
                    topo.len(),
                    self.arrival_rates.len()
                ),
            ));
        }
        if self
            .arrival_rates
            .iter()
            .any(|r| !(*r >= 0.0 && r.is_finite()))
        {
            return Err(invalid(
                "traffic.arrival_rates",
                "rates must be finite and non-negative",
            ));
        }
        if !(self.mean_holding_s > 0.0 && self.mean_holding_s.is_finite()) {
            return Err(invalid("traffic.mean_holding_s", "must be positive"));
        }
        Ok(())
    }
}

/// Uniform point inside a cell's hexagon, by rejection from its bounding box.
pub fn sample_in_cell<R: Rng + ?Sized>(cell: &Cell, rng: &mut R) -> Point {
    let half_h = 3f64.sqrt() / 2.0 * cell.radius_m;
    loop {
        let p = Point::new(
            cell.center.x + rng.random_range(-cell.radius_m..=cell.radius_m),
            cell.center.y + rng.random_range(-half_h..=half_h),
        );
        if cell.contains(p) {
            return p;
        }
    }
}

/// All arrivals in `[0, horizon_s)` plus their departures, sorted by time
/// with call id as tiebreak. Each cell draws from its own stream of the
/// seeded generator, so one cell's rate never perturbs another's calls.
pub fn generate_events(
    profile: &TrafficProfile,
    topo: &Topology,
    horizon_s: f64,
) -> Result<Vec<CallEvent>> {
    if !(horizon_s > 0.0 && horizon_s.is_finite()) {
        return Err(invalid("traffic.horizon_s", "must be positive"));
    }
    profile.validate(topo)?;
    let holding = Exp::new(1.0 / profile.mean_holding_s)
        .map_err(|e| invalid("traffic.mean_holding_s", e.to_string()))?;

    // (arrival time, cell, position, holding)
    let mut arrivals: Vec<(f64, CellId, Point, f64)> = Vec::new();
    for (cell, rate) in topo.cells().iter().zip(&profile.arrival_rates) {
        if *rate == 0.0 {
            continue;
        }
        let gap = Exp::new(*rate).map_err(|e| invalid("traffic.arrival_rates", e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
        rng.set_stream(u64::from(cell.id.0));
        let mut t = 0.0;
        loop {
            t += gap.sample(&mut rng);
            if t >= horizon_s {
                break;
            }
            let position = sample_in_cell(cell, &mut rng);
            let hold = loop {
                let h = holding.sample(&mut rng);
                if h > 0.0 {
                    break h;
                }
            };
            arrivals.push((t, cell.id, position, hold));
        }
    }
    arrivals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut events = Vec::with_capacity(arrivals.len() * 2);
    for (i, (t, cell, position, hold)) in arrivals.into_iter().enumerate() {
        let call = CallId(i as u64);
        events.push(CallEvent {
            kind: EventKind::Arrival { position },
            time: t,
            cell,
            call,
        });
        events.push(CallEvent {
            kind: EventKind::Departure,
            time: t + hold,
            cell,
            call,
        });
    }
    events.sort_by(CallEvent::order);
    Ok(events)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CallStats {
    pub offered: u64,
    pub admitted: u64,
    pub blocked: u64,
}

impl CallStats {
    pub fn blocking_ratio(&self) -> f64 {
        if self.offered == 0 {
            0.0
        } else {
            self.blocked as f64 / self.offered as f64
        }
    }
}

/// Pool state just before the first borrow and the plan that was applied.
#[derive(Debug, Clone)]
pub struct BorrowSnapshot {
    pub time: f64,
    pub pool_before: ChannelPool,
    pub plan: BorrowPlan,
}

#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub reference: CallStats,
    pub others: CallStats,
    pub borrows: u64,
    pub channels_borrowed: u64,
    pub first_borrow: Option<BorrowSnapshot>,
    /// Every neutralization planned during the replay, applied or not.
    pub declination: Declination,
    pub final_pool: ChannelPool,
}

/// When and how the reference cell borrows during a replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BorrowPolicy {
    pub reference: CellId,
    pub strategy: Strategy,
    pub borrow_request: usize,
    /// With `false` only the grants are applied; the neutralizations are
    /// still planned and recorded in [`ReplayOutcome::declination`].
    pub neutralize: bool,
}

/// Feeds events into `pool`. Whenever an arrival at the saturated reference
/// cell finds no channel, up to `borrow_request` channels are borrowed and
/// admission is retried once.
pub fn replay(
    mut pool: ChannelPool,
    events: &[CallEvent],
    policy: BorrowPolicy,
) -> Result<ReplayOutcome> {
    let reference = policy.reference;
    let mut reference_stats = CallStats::default();
    let mut others = CallStats::default();
    let mut borrows = 0;
    let mut channels_borrowed = 0;
    let mut first_borrow = None;
    let mut declination = Declination::default();

    for ev in events {
        match ev.kind {
            EventKind::Departure => {
                // Blocked calls never entered the pool.
                if pool.call(ev.call).is_some() {
                    pool.release_call(ev.call, ev.time)?;
                }
            }
            EventKind::Arrival { position } => {
                let stats = if ev.cell == reference {
                    &mut reference_stats
                } else {
                    &mut others
                };
                stats.offered += 1;
                let mut verdict = pool.admit_call(ev.cell, ev.call, position, ev.time)?;
                if verdict == Admission::Blocked
                    && ev.cell == reference
                    && pool.free_native_count(reference)? == 0
                {
                    let plan =
                        pool.request_borrow(reference, policy.borrow_request, policy.strategy)?;
                    if plan.granted_count() > 0 {
                        if first_borrow.is_none() {
                            first_borrow = Some(BorrowSnapshot {
                                time: ev.time,
                                pool_before: pool.clone(),
                                plan: plan.clone(),
                            });
                        }
                        declination.record(&pool, &plan)?;
                        if policy.neutralize {
                            pool.apply_plan(&plan)?;
                        } else {
                            pool.apply_plan(&plan.without_neutralizations())?;
                        }
                        borrows += 1;
                        channels_borrowed += plan.granted_count() as u64;
                        verdict = pool.admit_call(ev.cell, ev.call, position, ev.time)?;
                    }
                }
                match verdict {
                    Admission::Assigned(_) => stats.admitted += 1,
                    Admission::Blocked => stats.blocked += 1,
                }
            }
        }
    }

    Ok(ReplayOutcome {
        reference: reference_stats,
        others,
        borrows,
        channels_borrowed,
        first_borrow,
        declination,
        final_pool: pool,
    })
}

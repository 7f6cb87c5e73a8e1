//! Per-cell channel pools, channel borrowing and the two interference
//! declination strategies.
//!
//! A saturated reference cell borrows free channels from its hex-adjacent
//! donors (one donor band at a time, round-robin). Each borrowed channel is
//! reused by the other tier-1 co-channel cells of the reference, so every
//! such copy is neutralized either by blocking it (only possible while it is
//! free) or by bifurcating that cell: the copy stays usable, but only by
//! inner-region users and only within a quota that may grow up to the
//! number of restricted channels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{distance_m, BandTag, CellId, Point, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CallId(pub u64);

impl fmt::Display for CallId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A frequency channel. The same id in two cells is co-channel reuse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChannelId {
    pub band: BandTag,
    pub index: u16,
}

impl ChannelId {
    pub fn new(band: BandTag, index: u16) -> Self {
        Self { band, index }
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.band, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Inner,
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Occupancy {
    Free,
    Occupied { call: CallId, region: Region },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelState {
    Free,
    Occupied { call: CallId, region: Region },
    Blocked,
    Lent { borrower: CellId },
    Borrowed { donor: CellId, occupancy: Occupancy },
}

impl ChannelState {
    /// Whether the owning base station is transmitting on this channel.
    pub fn is_transmitting(&self) -> bool {
        matches!(
            self,
            ChannelState::Occupied { .. }
                | ChannelState::Borrowed {
                    occupancy: Occupancy::Occupied { .. },
                    ..
                }
        )
    }
}

/// How a borrow neutralizes co-channel copies of the borrowed channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Conventional baseline: borrow without any declination.
    None,
    /// Block every tier-1 copy; channels with an occupied copy are skipped.
    Blocking,
    /// Restrict every tier-1 copy to inner users of that cell.
    Bifurcation,
    /// Block free copies, bifurcate occupied ones.
    Auto,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::None,
        Strategy::Blocking,
        Strategy::Bifurcation,
        Strategy::Auto,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::Blocking => "blocking",
            Strategy::Bifurcation => "bifurcation",
            Strategy::Auto => "auto",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                format!("unknown strategy `{s}` (expected none, blocking, bifurcation or auto)")
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NeutralizeAction {
    Block,
    BifurcateInnerOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grant {
    pub donor: CellId,
    pub channels: Vec<ChannelId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neutralization {
    pub cell: CellId,
    pub channel: ChannelId,
    pub action: NeutralizeAction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BorrowPlan {
    pub reference_cell: CellId,
    pub grants: Vec<Grant>,
    pub neutralizations: Vec<Neutralization>,
}

impl BorrowPlan {
    pub fn empty(reference_cell: CellId) -> Self {
        Self {
            reference_cell,
            grants: Vec::new(),
            neutralizations: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.grants.is_empty() && self.neutralizations.is_empty()
    }

    /// All granted channels in grant order.
    pub fn granted(&self) -> impl Iterator<Item = (CellId, ChannelId)> + '_ {
        self.grants
            .iter()
            .flat_map(|g| g.channels.iter().map(move |c| (g.donor, *c)))
    }

    pub fn granted_count(&self) -> usize {
        self.grants.iter().map(|g| g.channels.len()).sum()
    }

    /// Same grants, no neutralizations.
    pub fn without_neutralizations(&self) -> Self {
        Self {
            reference_cell: self.reference_cell,
            grants: self.grants.clone(),
            neutralizations: Vec::new(),
        }
    }

    fn push_grant(&mut self, donor: CellId, channel: ChannelId) {
        match self.grants.iter_mut().find(|g| g.donor == donor) {
            Some(g) => g.channels.push(channel),
            None => self.grants.push(Grant {
                donor,
                channels: vec![channel],
            }),
        }
    }
}

/// Inner-user quota of a bifurcated cell on one band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionAllocation {
    pub cell: CellId,
    pub band: BandTag,
    pub inner_quota: u16,
    pub used: u16,
    /// Channels of this band restricted to inner users at this cell.
    pub sub_band: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Assigned(ChannelId),
    Blocked,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CallRecord {
    pub cell: CellId,
    pub channel: ChannelId,
    pub region: Region,
    pub since: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterfererActivity {
    pub cell: CellId,
    pub tier: Tier,
    pub active: bool,
}

/// Neutralizations recorded without being applied, so the same occupancy
/// pattern can be scored with and without interference declination.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Declination {
    // Bifurcated copies keep the call they carried at plan time.
    actions: BTreeMap<(CellId, ChannelId), (NeutralizeAction, Option<CallId>)>,
}

impl Declination {
    /// Records `plan`'s neutralizations as evaluated against `pool`.
    pub fn record(&mut self, pool: &ChannelPool, plan: &BorrowPlan) -> Result<()> {
        for n in &plan.neutralizations {
            let incumbent = match pool.state(n.cell, n.channel)? {
                Some(ChannelState::Occupied { call, .. }) => Some(call),
                _ => None,
            };
            self.actions
                .entry((n.cell, n.channel))
                .or_insert((n.action, incumbent));
        }
        Ok(())
    }

    pub fn action(&self, cell: CellId, channel: ChannelId) -> Option<NeutralizeAction> {
        self.actions.get(&(cell, channel)).map(|(a, _)| *a)
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Whether a transmitting copy would still be allowed to transmit.
    fn permits(&self, cell: CellId, channel: ChannelId, state: &ChannelState) -> bool {
        match self.actions.get(&(cell, channel)) {
            None => true,
            Some((NeutralizeAction::Block, _)) => false,
            Some((NeutralizeAction::BifurcateInnerOnly, incumbent)) => match state {
                ChannelState::Occupied { call, region } => {
                    *region == Region::Inner || Some(*call) == *incumbent
                }
                _ => true,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct CellPool {
    band: BandTag,
    center: Point,
    channels: BTreeMap<ChannelId, ChannelState>,
    inner_only: BTreeSet<ChannelId>,
}

impl CellPool {
    fn native(&self) -> impl Iterator<Item = (&ChannelId, &ChannelState)> {
        let band = self.band;
        self.channels.iter().filter(move |(c, _)| c.band == band)
    }
}

/// Channel state of every cell in a topology.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPool {
    topo: Arc<Topology>,
    inner_radius_m: f64,
    cells: Vec<CellPool>,
    allocations: BTreeMap<(CellId, BandTag), RegionAllocation>,
    calls: BTreeMap<CallId, CallRecord>,
}

impl ChannelPool {
    /// All channels start free. `inner_fraction` of the cell radius bounds
    /// the inner region.
    pub fn new(topo: Arc<Topology>, inner_fraction: f64) -> Result<Self> {
        if !(inner_fraction > 0.0 && inner_fraction <= 1.0) {
            return Err(crate::error::invalid(
                "inner_fraction",
                "must lie in (0, 1]",
            ));
        }
        let cells = topo
            .cells()
            .iter()
            .map(|c| CellPool {
                band: c.band.tag,
                center: c.center,
                channels: (0..c.band.channel_count)
                    .map(|i| (ChannelId::new(c.band.tag, i), ChannelState::Free))
                    .collect(),
                inner_only: BTreeSet::new(),
            })
            .collect();
        Ok(Self {
            inner_radius_m: inner_fraction * topo.cell_radius_m(),
            topo,
            cells,
            allocations: BTreeMap::new(),
            calls: BTreeMap::new(),
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    fn pool(&self, cell: CellId) -> Result<&CellPool> {
        (cell.0 as usize)
            .checked_sub(1)
            .and_then(|i| self.cells.get(i))
            .ok_or(Error::UnknownCell(cell))
    }

    fn pool_mut(&mut self, cell: CellId) -> Result<&mut CellPool> {
        (cell.0 as usize)
            .checked_sub(1)
            .and_then(|i| self.cells.get_mut(i))
            .ok_or(Error::UnknownCell(cell))
    }

    /// State of `channel` at `cell`, `None` if the cell neither owns nor
    /// borrows it.
    pub fn state(&self, cell: CellId, channel: ChannelId) -> Result<Option<ChannelState>> {
        Ok(self.pool(cell)?.channels.get(&channel).copied())
    }

    /// Every channel the cell owns or borrows, ascending.
    pub fn channels(
        &self,
        cell: CellId,
    ) -> Result<impl Iterator<Item = (ChannelId, ChannelState)> + '_> {
        Ok(self.pool(cell)?.channels.iter().map(|(c, s)| (*c, *s)))
    }

    pub fn is_inner_only(&self, cell: CellId, channel: ChannelId) -> Result<bool> {
        Ok(self.pool(cell)?.inner_only.contains(&channel))
    }

    pub fn allocation(&self, cell: CellId, band: BandTag) -> Option<&RegionAllocation> {
        self.allocations.get(&(cell, band))
    }

    pub fn allocations(&self) -> impl Iterator<Item = &RegionAllocation> {
        self.allocations.values()
    }

    pub fn call(&self, call: CallId) -> Option<&CallRecord> {
        self.calls.get(&call)
    }

    pub fn active_calls(&self) -> usize {
        self.calls.len()
    }

    pub fn free_native_count(&self, cell: CellId) -> Result<usize> {
        Ok(self
            .pool(cell)?
            .native()
            .filter(|(_, s)| **s == ChannelState::Free)
            .count())
    }

    /// Inner iff the user is within `inner_fraction · radius` of the BS.
    pub fn region_of(&self, cell: CellId, position: Point) -> Result<Region> {
        let center = self.pool(cell)?.center;
        Ok(if distance_m(center, position) <= self.inner_radius_m {
            Region::Inner
        } else {
            Region::Outer
        })
    }

    /// Plans a borrow of up to `needed` channels for a saturated cell.
    pub fn request_borrow(
        &self,
        reference: CellId,
        needed: usize,
        strategy: Strategy,
    ) -> Result<BorrowPlan> {
        let ref_pool = self.pool(reference)?;
        if needed == 0 {
            return Ok(BorrowPlan::empty(reference));
        }
        if self.free_native_count(reference)? > 0 {
            return Err(Error::NotSaturated(reference));
        }

        // Donor bands, ordered by their lowest-id adjacent cell.
        let adjacent = self.topo.adjacent(reference)?;
        let mut donors_by_band: Vec<(BandTag, Vec<CellId>)> = Vec::new();
        for cell in &adjacent {
            let band = self.pool(*cell)?.band;
            if band == ref_pool.band {
                continue;
            }
            match donors_by_band.iter_mut().find(|(b, _)| *b == band) {
                Some((_, cells)) => cells.push(*cell),
                None => donors_by_band.push((band, vec![*cell])),
            }
        }

        let mut plan = BorrowPlan::empty(reference);
        let mut taken: BTreeSet<ChannelId> = BTreeSet::new();
        let mut granted = 0;
        'rounds: loop {
            let mut progressed = false;
            for (band, donors) in &donors_by_band {
                if granted == needed {
                    break 'rounds;
                }
                let tier1 = &self.topo.cochannel_interferers(reference, *band)?.tier1;
                if let Some((donor, channel, actions)) =
                    self.next_grantable(reference, donors, tier1, &taken, strategy)?
                {
                    taken.insert(channel);
                    plan.push_grant(donor, channel);
                    plan.neutralizations
                        .extend(actions.into_iter().map(|(cell, action)| Neutralization {
                            cell,
                            channel,
                            action,
                        }));
                    granted += 1;
                    progressed = true;
                }
            }
            if !progressed || granted == needed {
                break;
            }
        }
        Ok(plan)
    }

    /// Lowest-id donor, lowest-index free channel whose co-channel copies
    /// the strategy can neutralize.
    #[allow(clippy::type_complexity)]
    fn next_grantable(
        &self,
        reference: CellId,
        donors: &[CellId],
        tier1: &[CellId],
        taken: &BTreeSet<ChannelId>,
        strategy: Strategy,
    ) -> Result<Option<(CellId, ChannelId, Vec<(CellId, NeutralizeAction)>)>> {
        let ref_pool = self.pool(reference)?;
        for donor in donors {
            let donor_pool = self.pool(*donor)?;
            for (channel, state) in donor_pool.native() {
                if *state != ChannelState::Free
                    || donor_pool.inner_only.contains(channel)
                    || taken.contains(channel)
                    || ref_pool.channels.contains_key(channel)
                {
                    continue;
                }
                if let Some(actions) =
                    self.neutralizations_for(*channel, *donor, tier1, strategy)?
                {
                    return Ok(Some((*donor, *channel, actions)));
                }
            }
        }
        Ok(None)
    }

    fn neutralizations_for(
        &self,
        channel: ChannelId,
        donor: CellId,
        tier1: &[CellId],
        strategy: Strategy,
    ) -> Result<Option<Vec<(CellId, NeutralizeAction)>>> {
        if strategy == Strategy::None {
            return Ok(Some(Vec::new()));
        }
        let mut actions = Vec::new();
        for cell in tier1.iter().filter(|c| **c != donor) {
            let copy = self.pool(*cell)?.channels.get(&channel).copied();
            let action = match (strategy, copy) {
                (_, Some(ChannelState::Blocked)) => NeutralizeAction::Block,
                (Strategy::Blocking | Strategy::Auto, Some(ChannelState::Free)) => {
                    NeutralizeAction::Block
                }
                (
                    Strategy::Bifurcation,
                    Some(ChannelState::Free | ChannelState::Occupied { .. }),
                )
                | (Strategy::Auto, Some(ChannelState::Occupied { .. })) => {
                    NeutralizeAction::BifurcateInnerOnly
                }
                _ => return Ok(None),
            };
            actions.push((*cell, action));
        }
        Ok(Some(actions))
    }

    fn validate_plan(&self, plan: &BorrowPlan) -> Result<()> {
        let stale = |msg: String| Err(Error::StalePlan(msg));
        let reference = self.pool(plan.reference_cell)?;
        let mut seen = BTreeSet::new();
        for (donor, channel) in plan.granted() {
            let pool = self.pool(donor)?;
            if pool.band != channel.band {
                return stale(format!("cell {donor} does not own {channel}"));
            }
            if pool.channels.get(&channel) != Some(&ChannelState::Free)
                || pool.inner_only.contains(&channel)
            {
                return stale(format!("{channel} is no longer free at cell {donor}"));
            }
            if reference.channels.contains_key(&channel) || !seen.insert(channel) {
                return stale(format!(
                    "{channel} already held by cell {}",
                    plan.reference_cell
                ));
            }
        }
        for n in &plan.neutralizations {
            let pool = self.pool(n.cell)?;
            let copy = pool.channels.get(&n.channel);
            let ok = match n.action {
                NeutralizeAction::Block => {
                    matches!(copy, Some(ChannelState::Free | ChannelState::Blocked))
                }
                NeutralizeAction::BifurcateInnerOnly => {
                    matches!(
                        copy,
                        Some(ChannelState::Free | ChannelState::Occupied { .. })
                    )
                }
            };
            if pool.band != n.channel.band || !ok {
                return stale(format!(
                    "cannot apply {:?} to {} at cell {}",
                    n.action, n.channel, n.cell
                ));
            }
        }
        Ok(())
    }

    /// Applies a plan atomically: on error the pool is left untouched.
    pub fn apply_plan(&mut self, plan: &BorrowPlan) -> Result<()> {
        self.validate_plan(plan)?;
        let reference = plan.reference_cell;

        for (donor, channel) in plan.granted() {
            self.pool_mut(donor)?.channels.insert(
                channel,
                ChannelState::Lent {
                    borrower: reference,
                },
            );
            self.pool_mut(reference)?.channels.insert(
                channel,
                ChannelState::Borrowed {
                    donor,
                    occupancy: Occupancy::Free,
                },
            );
        }

        for n in &plan.neutralizations {
            match n.action {
                NeutralizeAction::Block => {
                    let pool = self.pool_mut(n.cell)?;
                    let was_restricted = pool.inner_only.remove(&n.channel);
                    pool.channels.insert(n.channel, ChannelState::Blocked);
                    if was_restricted {
                        if let Some(alloc) = self.allocations.get_mut(&(n.cell, n.channel.band)) {
                            alloc.sub_band -= 1;
                            alloc.inner_quota = alloc.inner_quota.min(alloc.sub_band);
                        }
                    }
                }
                NeutralizeAction::BifurcateInnerOnly => {
                    let pool = self.pool_mut(n.cell)?;
                    let occupied = matches!(
                        pool.channels.get(&n.channel),
                        Some(ChannelState::Occupied { .. })
                    );
                    if pool.inner_only.insert(n.channel) {
                        let alloc = self.allocations.entry((n.cell, n.channel.band)).or_insert(
                            RegionAllocation {
                                cell: n.cell,
                                band: n.channel.band,
                                inner_quota: 0,
                                used: 0,
                                sub_band: 0,
                            },
                        );
                        alloc.sub_band += 1;
                        if occupied {
                            alloc.used += 1;
                            alloc.inner_quota += 1;
                        }
                    }
                    self.pool_mut(reference)?.inner_only.insert(n.channel);
                }
            }
        }
        Ok(())
    }

    /// Admits a new call at `position`, assigning the lowest eligible channel.
    pub fn admit_call(
        &mut self,
        cell: CellId,
        call: CallId,
        position: Point,
        now: f64,
    ) -> Result<Admission> {
        let topo_cell = self.topo.cell(cell)?;
        if !topo_cell.contains(position) {
            return Err(Error::PositionOutsideCell {
                cell,
                x: position.x,
                y: position.y,
            });
        }
        if self.calls.contains_key(&call) {
            return Err(Error::DuplicateCall(call));
        }
        let region = self.region_of(cell, position)?;
        let pool = self.pool(cell)?;

        let unrestricted_native = pool
            .native()
            .find(|(c, s)| **s == ChannelState::Free && !pool.inner_only.contains(c))
            .map(|(c, _)| *c);

        let restricted_native = if region == Region::Inner {
            let quota_room = self
                .allocations
                .get(&(cell, pool.band))
                .is_some_and(|a| a.used < a.inner_quota || a.inner_quota < a.sub_band);
            quota_room
                .then(|| {
                    pool.native()
                        .find(|(c, s)| **s == ChannelState::Free && pool.inner_only.contains(c))
                        .map(|(c, _)| *c)
                })
                .flatten()
        } else {
            None
        };

        let borrowed = pool
            .channels
            .iter()
            .find(|(c, s)| {
                matches!(
                    s,
                    ChannelState::Borrowed {
                        occupancy: Occupancy::Free,
                        ..
                    }
                ) && (region == Region::Inner || !pool.inner_only.contains(c))
            })
            .map(|(c, _)| *c);

        let Some(channel) = unrestricted_native.or(restricted_native).or(borrowed) else {
            return Ok(Admission::Blocked);
        };

        let pool = self.pool_mut(cell)?;
        let restricted = pool.inner_only.contains(&channel);
        let is_native = channel.band == pool.band;
        let slot = pool
            .channels
            .get_mut(&channel)
            .expect("channel chosen from this pool");
        *slot = match *slot {
            ChannelState::Borrowed { donor, .. } => ChannelState::Borrowed {
                donor,
                occupancy: Occupancy::Occupied { call, region },
            },
            _ => ChannelState::Occupied { call, region },
        };
        if is_native && restricted {
            let alloc = self
                .allocations
                .get_mut(&(cell, channel.band))
                .expect("restricted native channels have an allocation");
            if alloc.used == alloc.inner_quota {
                alloc.inner_quota += 1;
            }
            alloc.used += 1;
        }
        self.calls.insert(
            call,
            CallRecord {
                cell,
                channel,
                region,
                since: now,
            },
        );
        Ok(Admission::Assigned(channel))
    }

    /// Ends a call and frees its channel. Returns the call's holding time.
    pub fn release_call(&mut self, call: CallId, now: f64) -> Result<f64> {
        let record = self.calls.remove(&call).ok_or(Error::UnknownCall(call))?;
        let pool = self.pool_mut(record.cell)?;
        let restricted = pool.inner_only.contains(&record.channel);
        let is_native = record.channel.band == pool.band;
        let slot = pool
            .channels
            .get_mut(&record.channel)
            .expect("active call refers to a held channel");
        *slot = match *slot {
            ChannelState::Borrowed { donor, .. } => ChannelState::Borrowed {
                donor,
                occupancy: Occupancy::Free,
            },
            _ => ChannelState::Free,
        };
        if is_native && restricted {
            if let Some(alloc) = self
                .allocations
                .get_mut(&(record.cell, record.channel.band))
            {
                alloc.used -= 1;
            }
        }
        Ok(now - record.since)
    }

    /// Transmit activity of every tier-1/tier-2 co-channel cell on a channel
    /// held by `reference`.
    pub fn active_cochannel_interferers(
        &self,
        reference: CellId,
        channel: ChannelId,
    ) -> Result<Vec<InterfererActivity>> {
        self.interferers(reference, channel, None)
    }

    /// As [`Self::active_cochannel_interferers`], but for a pool that kept
    /// serving without declination: copies `declination` would have blocked
    /// are silent, and bifurcated copies only count while serving an inner
    /// user or the call they already carried when the plan was made.
    pub fn active_cochannel_interferers_declined(
        &self,
        reference: CellId,
        channel: ChannelId,
        declination: &Declination,
    ) -> Result<Vec<InterfererActivity>> {
        self.interferers(reference, channel, Some(declination))
    }

    fn interferers(
        &self,
        reference: CellId,
        channel: ChannelId,
        declination: Option<&Declination>,
    ) -> Result<Vec<InterfererActivity>> {
        let held = match self.pool(reference)?.channels.get(&channel) {
            Some(ChannelState::Blocked | ChannelState::Lent { .. }) | None => false,
            Some(_) => true,
        };
        if !held {
            return Err(Error::ChannelNotHeld {
                cell: reference,
                channel,
            });
        }
        let tiers = self.topo.cochannel_interferers(reference, channel.band)?;
        let tagged = tiers
            .tier1
            .iter()
            .map(|c| (*c, Tier::First))
            .chain(tiers.tier2.iter().map(|c| (*c, Tier::Second)));
        tagged
            .map(|(cell, tier)| {
                let state = self.pool(cell)?.channels.get(&channel).copied();
                let active = state.is_some_and(|s| {
                    s.is_transmitting() && declination.is_none_or(|d| d.permits(cell, channel, &s))
                });
                Ok(InterfererActivity { cell, tier, active })
            })
            .collect()
    }

    /// Checks conservation, the lending bijection, quota bounds and blocking
    /// soundness. Returns the first violation found.
    pub fn check_invariants(&self) -> Result<(), String> {
        let count = usize::from(self.topo.channel_count());
        let mut lent = BTreeSet::new();
        let mut borrowed = BTreeSet::new();
        let mut occupied_calls = BTreeMap::new();

        for (i, pool) in self.cells.iter().enumerate() {
            let id = CellId(i as u32 + 1);
            let (mut free, mut occ, mut blocked, mut lent_n) = (0, 0, 0, 0);
            for (ch, state) in pool.native() {
                match state {
                    ChannelState::Free => free += 1,
                    ChannelState::Occupied { call, .. } => {
                        occ += 1;
                        occupied_calls.insert(*call, (id, *ch));
                    }
                    ChannelState::Blocked => blocked += 1,
                    ChannelState::Lent { borrower } => {
                        lent_n += 1;
                        lent.insert((id, *borrower, *ch));
                    }
                    ChannelState::Borrowed { .. } => {
                        return Err(format!("cell {id} marks native {ch} as borrowed"));
                    }
                }
            }
            if free + occ + blocked + lent_n != count {
                return Err(format!(
                    "cell {id}: conservation broken ({free}+{occ}+{blocked}+{lent_n} != {count})"
                ));
            }
            for (ch, state) in pool.channels.iter().filter(|(c, _)| c.band != pool.band) {
                match state {
                    ChannelState::Borrowed { donor, occupancy } => {
                        borrowed.insert((*donor, id, *ch));
                        if let Occupancy::Occupied { call, .. } = occupancy {
                            occupied_calls.insert(*call, (id, *ch));
                        }
                    }
                    other => return Err(format!("cell {id}: foreign {ch} in state {other:?}")),
                }
            }
            for ch in &pool.inner_only {
                match pool.channels.get(ch) {
                    Some(ChannelState::Blocked | ChannelState::Lent { .. }) | None => {
                        return Err(format!("cell {id}: inner-only {ch} is not usable"));
                    }
                    _ => {}
                }
            }
        }
        if lent != borrowed {
            return Err(format!(
                "lending bijection broken: lent {lent:?} vs borrowed {borrowed:?}"
            ));
        }

        for ((cell, band), alloc) in &self.allocations {
            if !(alloc.used <= alloc.inner_quota && alloc.inner_quota <= alloc.sub_band) {
                return Err(format!(
                    "cell {cell} band {band}: quota bounds broken {alloc:?}"
                ));
            }
            let pool = self.pool(*cell).map_err(|e| e.to_string())?;
            let restricted: Vec<_> = pool
                .native()
                .filter(|(c, _)| pool.inner_only.contains(c))
                .collect();
            let used = restricted
                .iter()
                .filter(|(_, s)| matches!(s, ChannelState::Occupied { .. }))
                .count();
            if restricted.len() != usize::from(alloc.sub_band) || used != usize::from(alloc.used) {
                return Err(format!(
                    "cell {cell} band {band}: allocation out of sync {alloc:?}"
                ));
            }
        }

        if occupied_calls.len() != self.calls.len() {
            return Err(format!(
                "{} occupied channels but {} active calls",
                occupied_calls.len(),
                self.calls.len()
            ));
        }
        for (call, rec) in &self.calls {
            if occupied_calls.get(call) != Some(&(rec.cell, rec.channel)) {
                return Err(format!("call {call} is not on the channel it was assigned"));
            }
        }
        Ok(())
    }
}

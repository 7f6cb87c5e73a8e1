use std::fmt;
use std::sync::Arc;

use crate::channel::{
    ChannelId, ChannelPool, InterfererActivity, NeutralizeAction, Strategy, Tier,
};
use crate::error::{Error, Result};
use crate::metrics::{outage_monte_carlo_with_noise, LinkSample, OutageThreshold};
use crate::propagation::{linear_to_db, note_carrier_range, path_loss_db, received_power_w};
use crate::topology::{build_topology, distance_m, Cell, Topology, REFERENCE_CELL};
use crate::traffic::{generate_events, replay, BorrowPolicy, CallStats, TrafficProfile};

use super::config::{ProbeChannel, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    /// Borrowing without interference declination.
    Conventional,
    /// Borrowing with the configured declination strategy.
    Proposed,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Conventional => "conventional",
            Scheme::Proposed => "proposed",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "conventional" => Some(Scheme::Conventional),
            "proposed" => Some(Scheme::Proposed),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub distance_km: f64,
    pub scheme: Scheme,
    pub sinr_db: f64,
    pub capacity_bps_hz: f64,
    /// Closed form, interference only.
    pub outage_prob: f64,
    /// Monte-Carlo estimate with the noise floor included.
    pub outage_mc_noise: f64,
    pub active_tier1: usize,
    pub active_tier2: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportMetadata {
    pub config_hash: String,
    pub seed: u64,
    pub strategy: Strategy,
    pub probe_channel: ChannelId,
    pub first_borrow_s: f64,
    pub channels_granted: usize,
    pub copies_blocked: usize,
    pub copies_bifurcated: usize,
    pub noise_w: f64,
    pub conventional_calls: CallStats,
    pub proposed_calls: CallStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub rows: Vec<MetricsRow>,
    pub metadata: ReportMetadata,
}

impl MetricsReport {
    pub fn scheme_rows(&self, scheme: Scheme) -> impl Iterator<Item = &MetricsRow> {
        self.rows.iter().filter(move |r| r.scheme == scheme)
    }

    /// `(conventional, proposed)` rows at each sweep distance.
    pub fn pairs(&self) -> Vec<(&MetricsRow, &MetricsRow)> {
        self.scheme_rows(Scheme::Conventional)
            .zip(self.scheme_rows(Scheme::Proposed))
            .collect()
    }
}

/// Co-channel transmitters heard on the probe channel in one scheme.
struct Interference<'a> {
    active: Vec<&'a Cell>,
    tier1: usize,
    tier2: usize,
}

impl<'a> Interference<'a> {
    fn new(acts: &[InterfererActivity], topo: &'a Topology) -> Result<Self> {
        let count = |tier| acts.iter().filter(|a| a.tier == tier && a.active).count();
        Ok(Self {
            tier1: count(Tier::First),
            tier2: count(Tier::Second),
            active: acts
                .iter()
                .filter(|a| a.active)
                .map(|a| topo.cell(a.cell))
                .collect::<Result<_>>()?,
        })
    }
}

fn mix_seed(seed: u64, row: usize) -> u64 {
    seed ^ (row as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

struct Probe<'a> {
    cfg: &'a ScenarioConfig,
    serving: &'a Cell,
    threshold: OutageThreshold,
    noise_w: f64,
}

impl Probe<'_> {
    fn received(&self, from: &Cell, d_km: f64) -> Result<f64> {
        let d = d_km.max(self.cfg.sweep.min_eval_km);
        let loss = path_loss_db(&self.cfg.propagation_params(from.bs_height_m), d)?;
        received_power_w(from.tx_power_w, loss)
    }

    fn evaluate(
        &self,
        scheme: Scheme,
        d_km: f64,
        heard: &Interference<'_>,
        mc_seed: u64,
    ) -> Result<MetricsRow> {
        let n = self.cfg.probe.azimuth_samples;
        let (mut sinr, mut cap, mut out, mut out_mc) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..n {
            let az = self.cfg.probe.azimuth_deg + 360.0 * f64::from(k) / f64::from(n);
            let at = self.serving.center.polar_offset(d_km * 1000.0, az);
            let s0 = self.received(self.serving, d_km)?;
            let interferers = heard
                .active
                .iter()
                .map(|c| self.received(c, distance_m(c.center, at) / 1000.0))
                .collect::<Result<Vec<_>>>()?;
            let link = LinkSample::evaluate(d_km, s0, interferers, self.noise_w, &self.threshold)?;
            out_mc += outage_monte_carlo_with_noise(
                &self.threshold,
                link.s0_w,
                &link.interferer_powers_w,
                link.n0_w,
                self.cfg.monte_carlo_samples,
                mc_seed.wrapping_add(u64::from(k)),
            )?;
            sinr += link.sinr_linear;
            cap += link.capacity_bps_hz;
            out += link.outage_prob;
        }
        let n = f64::from(n);
        Ok(MetricsRow {
            distance_km: d_km,
            scheme,
            sinr_db: linear_to_db(sinr / n),
            capacity_bps_hz: cap / n,
            outage_prob: out / n,
            outage_mc_noise: out_mc / n,
            active_tier1: heard.tier1,
            active_tier2: heard.tier2,
        })
    }
}

/// Runs the distance-sweep comparison between conventional borrowing and
/// borrowing with interference declination.
///
/// Traffic is replayed over the horizon with borrowing enabled but without
/// neutralizing any co-channel copy. The occupancy left at the end of the
/// horizon is heard by a probe user on the first borrowed channel as it
/// moves outward from the reference BS. The conventional scheme hears every
/// transmitting copy; the proposed scheme hears the same occupancy through
/// the neutralizations its strategy planned along the way. A second replay
/// that applies those neutralizations supplies the proposed call statistics.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<MetricsReport> {
    cfg.validate()?;
    note_carrier_range(cfg.fc_mhz);

    let topo = Arc::new(build_topology(&cfg.topology_params())?);
    let profile = TrafficProfile::from_load_factors(
        &topo,
        REFERENCE_CELL,
        cfg.traffic.reference_load_factor,
        cfg.traffic.other_load_factor,
        cfg.traffic.mean_holding_s,
        cfg.seed,
    );
    let events = generate_events(&profile, &topo, cfg.traffic.horizon_s)?;
    // Calls still up at the horizon stay on air.
    let events = &events[..events.partition_point(|e| e.time < cfg.traffic.horizon_s)];
    let pool = ChannelPool::new(topo.clone(), cfg.inner_fraction)?;
    let policy = BorrowPolicy {
        reference: REFERENCE_CELL,
        strategy: cfg.strategy,
        borrow_request: cfg.borrow_request,
        neutralize: false,
    };

    let conventional_run = replay(pool.clone(), events, policy)?;
    let Some(snapshot) = &conventional_run.first_borrow else {
        return Err(if conventional_run.reference.blocked == 0 {
            Error::Premise("traffic never saturates the reference cell".into())
        } else {
            Error::Premise("the reference cell saturated but no channel could be borrowed".into())
        });
    };
    let proposed_run = replay(
        pool,
        events,
        BorrowPolicy {
            neutralize: true,
            ..policy
        },
    )?;

    let plan = &snapshot.plan;
    let serving = topo.cell(REFERENCE_CELL)?;
    let probe_channel = match cfg.probe.channel {
        ProbeChannel::Borrowed => plan
            .granted()
            .next()
            .map(|(_, c)| c)
            .expect("recorded borrows grant at least one channel"),
        ProbeChannel::Native => ChannelId::new(serving.band.tag, 0),
    };
    let occupancy = &conventional_run.final_pool;
    let heard_conventional = Interference::new(
        &occupancy.active_cochannel_interferers(REFERENCE_CELL, probe_channel)?,
        &topo,
    )?;
    let heard_proposed = Interference::new(
        &occupancy.active_cochannel_interferers_declined(
            REFERENCE_CELL,
            probe_channel,
            &conventional_run.declination,
        )?,
        &topo,
    )?;

    let probe = Probe {
        cfg,
        serving,
        threshold: cfg.threshold()?,
        noise_w: cfg.noise.power_w(),
    };
    let mut rows = Vec::new();
    for d in cfg.sweep_distances() {
        for (scheme, heard) in [
            (Scheme::Conventional, &heard_conventional),
            (Scheme::Proposed, &heard_proposed),
        ] {
            let seed = mix_seed(cfg.seed, rows.len());
            rows.push(probe.evaluate(scheme, d, heard, seed)?);
        }
    }

    let count_action = |action| {
        plan.neutralizations
            .iter()
            .filter(|n| n.action == action)
            .count()
    };
    Ok(MetricsReport {
        rows,
        metadata: ReportMetadata {
            config_hash: cfg.hash(),
            seed: cfg.seed,
            strategy: cfg.strategy,
            probe_channel,
            first_borrow_s: snapshot.time,
            channels_granted: plan.granted_count(),
            copies_blocked: count_action(NeutralizeAction::Block),
            copies_bifurcated: count_action(NeutralizeAction::BifurcateInnerOnly),
            noise_w: probe.noise_w,
            conventional_calls: conventional_run.reference,
            proposed_calls: proposed_run.reference,
        },
    })
}

//! Hexagonal reuse-3 cluster geometry.
//!
//! Cells are flat-topped regular hexagons laid out on an axial grid. The
//! reference cell (id 1) sits at the origin, cells 2..=7 form the first ring
//! in clockwise order, and further rings are appended so that every cell of
//! the central cluster has two complete co-channel tiers on every band.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Number of hex rings built around the reference cell. Ring 5 is the first
/// one that completes both co-channel tiers of every cluster cell.
pub const GRID_RINGS: i32 = 5;

/// Cells in the central cluster (reference cell plus its first ring).
pub const CLUSTER_SIZE: usize = 7;

/// Id of the reference (overloaded) cell.
pub const REFERENCE_CELL: CellId = CellId(1);

const SQRT_3: f64 = 1.732_050_807_568_877_2;

// Axial directions in clockwise order, starting toward cell 2.
const DIRECTIONS: [HexCoord; 6] = [
    HexCoord { q: 1, r: 0 },
    HexCoord { q: 1, r: -1 },
    HexCoord { q: 0, r: -1 },
    HexCoord { q: -1, r: 0 },
    HexCoord { q: -1, r: 1 },
    HexCoord { q: 0, r: 1 },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId(pub u32);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HexCoord {
    pub q: i32,
    pub r: i32,
}

impl HexCoord {
    pub const ORIGIN: HexCoord = HexCoord { q: 0, r: 0 };

    pub fn new(q: i32, r: i32) -> Self {
        Self { q, r }
    }

    /// Number of cell steps between two hexes.
    pub fn distance(self, other: HexCoord) -> i32 {
        let dq = self.q - other.q;
        let dr = self.r - other.r;
        (dq.abs() + dr.abs() + (dq + dr).abs()) / 2
    }

    fn offset(self, dir: HexCoord, steps: i32) -> HexCoord {
        HexCoord::new(self.q + dir.q * steps, self.r + dir.r * steps)
    }

    /// Reuse-3 colouring: 0 = A, 1 = B, 2 = C. Hex-adjacent cells always
    /// receive different colours.
    fn colour(self) -> BandTag {
        match (self.q - self.r).rem_euclid(3) {
            0 => BandTag::A,
            1 => BandTag::B,
            _ => BandTag::C,
        }
    }

    /// Center of a flat-topped hexagon with circumradius `radius_m`.
    pub fn center(self, radius_m: f64) -> Point {
        Point::new(
            radius_m * 1.5 * f64::from(self.q),
            radius_m * SQRT_3 * (f64::from(self.r) + f64::from(self.q) / 2.0),
        )
    }
}

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Point at `range_m` from `self` along `azimuth_deg` (counter-clockwise from +x).
    pub fn polar_offset(self, range_m: f64, azimuth_deg: f64) -> Point {
        let theta = azimuth_deg.to_radians();
        Point::new(
            self.x + range_m * theta.cos(),
            self.y + range_m * theta.sin(),
        )
    }
}

/// Euclidean distance between two positions, in meters.
pub fn distance_m(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BandTag {
    A,
    B,
    C,
}

impl BandTag {
    pub const ALL: [BandTag; 3] = [BandTag::A, BandTag::B, BandTag::C];
}

impl fmt::Display for BandTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BandTag::A => "A",
            BandTag::B => "B",
            BandTag::C => "C",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Band {
    pub tag: BandTag,
    pub channel_count: u16,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: CellId,
    pub coord: HexCoord,
    pub center: Point,
    pub radius_m: f64,
    pub band: Band,
    pub bs_height_m: f64,
    pub tx_power_w: f64,
}

impl Cell {
    /// Point-in-hexagon test for a flat-topped cell.
    pub fn contains(&self, p: Point) -> bool {
        let slack = 1e-9 * self.radius_m;
        let dx = (p.x - self.center.x).abs();
        let dy = (p.y - self.center.y).abs();
        let half_height = SQRT_3 / 2.0 * self.radius_m;
        dy <= half_height + slack && SQRT_3 * dx + dy <= SQRT_3 * self.radius_m + slack
    }
}

/// Co-channel interferers of one (cell, band) pair, each list sorted by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tiers {
    pub tier1: Vec<CellId>,
    pub tier2: Vec<CellId>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopologyParams {
    pub cell_radius_m: f64,
    pub channel_count_per_band: u16,
    pub bs_height_m: f64,
    pub tx_power_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    cells: Vec<Cell>,
    by_coord: HashMap<(i32, i32), CellId>,
    tiers: BTreeMap<(CellId, BandTag), Tiers>,
    channel_count: u16,
    radius_m: f64,
}

/// Builds the reference cluster and its surrounding rings.
pub fn build_topology(params: &TopologyParams) -> Result<Topology> {
    if !(params.cell_radius_m > 0.0 && params.cell_radius_m.is_finite()) {
        return Err(invalid("cell_radius_km", "must be positive"));
    }
    if params.channel_count_per_band == 0 {
        return Err(invalid("channel_count_per_band", "must be at least 1"));
    }
    if params.bs_height_m.is_nan() || params.bs_height_m <= 0.0 {
        return Err(invalid("bs_height_m", "must be positive"));
    }
    if params.tx_power_w.is_nan() || params.tx_power_w <= 0.0 {
        return Err(invalid("tx_power_w", "must be positive"));
    }

    let mut coords = vec![HexCoord::ORIGIN];
    for ring in 1..=GRID_RINGS {
        let mut hex = HexCoord::ORIGIN.offset(DIRECTIONS[0], ring);
        for side in 0..6 {
            let step = DIRECTIONS[(side + 2) % 6];
            for _ in 0..ring {
                coords.push(hex);
                hex = hex.offset(step, 1);
            }
        }
    }

    let cells: Vec<Cell> = coords
        .iter()
        .enumerate()
        .map(|(i, &coord)| Cell {
            id: CellId(i as u32 + 1),
            coord,
            center: coord.center(params.cell_radius_m),
            radius_m: params.cell_radius_m,
            band: Band {
                tag: coord.colour(),
                channel_count: params.channel_count_per_band,
            },
            bs_height_m: params.bs_height_m,
            tx_power_w: params.tx_power_w,
        })
        .collect();

    let by_coord = cells
        .iter()
        .map(|c| ((c.coord.q, c.coord.r), c.id))
        .collect();

    let shell_tol = 1e-6 * params.cell_radius_m;
    let mut tiers = BTreeMap::new();
    for cell in &cells {
        for band in BandTag::ALL {
            let mut ranked: Vec<(f64, CellId)> = cells
                .iter()
                .filter(|o| o.id != cell.id && o.band.tag == band)
                .map(|o| (distance_m(cell.center, o.center), o.id))
                .collect();
            ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

            let mut shells: Vec<Vec<CellId>> = Vec::new();
            let mut shell_radius = f64::NEG_INFINITY;
            for (d, id) in ranked {
                if d - shell_radius > shell_tol {
                    if shells.len() == 2 {
                        break;
                    }
                    shells.push(Vec::new());
                    shell_radius = d;
                }
                shells.last_mut().expect("shell pushed above").push(id);
            }
            let mut it = shells.into_iter();
            let mut entry = Tiers {
                tier1: it.next().unwrap_or_default(),
                tier2: it.next().unwrap_or_default(),
            };
            entry.tier1.sort();
            entry.tier2.sort();
            tiers.insert((cell.id, band), entry);
        }
    }

    Ok(Topology {
        cells,
        by_coord,
        tiers,
        channel_count: params.channel_count_per_band,
        radius_m: params.cell_radius_m,
    })
}

impl Topology {
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn channel_count(&self) -> u16 {
        self.channel_count
    }

    pub fn cell_radius_m(&self) -> f64 {
        self.radius_m
    }

    pub fn cell(&self, id: CellId) -> Result<&Cell> {
        let idx = (id.0 as usize)
            .checked_sub(1)
            .ok_or(Error::UnknownCell(id))?;
        self.cells.get(idx).ok_or(Error::UnknownCell(id))
    }

    pub fn cell_at(&self, coord: HexCoord) -> Option<&Cell> {
        self.by_coord
            .get(&(coord.q, coord.r))
            .and_then(|id| self.cell(*id).ok())
    }

    /// Hex-adjacent cells, ascending by id.
    pub fn adjacent(&self, id: CellId) -> Result<Vec<CellId>> {
        let coord = self.cell(id)?.coord;
        let mut out: Vec<CellId> = DIRECTIONS
            .iter()
            .filter_map(|d| self.cell_at(coord.offset(*d, 1)).map(|c| c.id))
            .collect();
        out.sort();
        Ok(out)
    }

    /// Tier-1 and tier-2 co-channel cells of `id` on `band`.
    pub fn cochannel_interferers(&self, id: CellId, band: BandTag) -> Result<&Tiers> {
        self.cell(id)?;
        Ok(&self.tiers[&(id, band)])
    }
}

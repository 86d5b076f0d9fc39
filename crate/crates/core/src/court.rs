//! Half-court geometry: the 1 ft lattice, point values and region partitions.
//!
//! Internal coordinates are feet with the origin at the baseline-left corner;
//! `x` runs along the baseline (0..50) and `y` away from it (0..47). The hoop
//! center sits at (25.0, 5.25).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WIDTH_CELLS: usize = 50;
pub const DEPTH_CELLS: usize = 47;
pub const NUM_CELLS: usize = WIDTH_CELLS * DEPTH_CELLS;

pub const HOOP_X: f64 = 25.0;
pub const HOOP_Y: f64 = 5.25;

/// Arc radius of the 3-point line, measured from the hoop center.
pub const THREE_POINT_RADIUS: f64 = 23.75;
/// Lateral distance of the straight corner-3 segments from the centerline.
pub const CORNER_THREE_X: f64 = 22.0;
/// Depth from the baseline where the straight corner segments end.
pub const CORNER_THREE_DEPTH: f64 = 14.0;
pub const RESTRICTED_AREA_RADIUS: f64 = 4.0;
/// Half-width and depth of the painted lane.
pub const LANE_HALF_WIDTH: f64 = 8.0;
pub const LANE_DEPTH: f64 = 19.0;
/// Shots at least this far from the hoop fall into the empirical12 residual region.
pub const HEAVE_RADIUS: f64 = 35.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Converts shot-chart source coordinates (tenths of feet, origin at the
    /// hoop center) to internal feet.
    pub fn from_source_tenths(loc_x: f64, loc_y: f64) -> Self {
        Self::new(HOOP_X + loc_x / 10.0, HOOP_Y + loc_y / 10.0)
    }

    pub fn to_source_tenths(self) -> (f64, f64) {
        ((self.x - HOOP_X) * 10.0, (self.y - HOOP_Y) * 10.0)
    }

    pub fn hoop_distance(self) -> f64 {
        (self.x - HOOP_X).hypot(self.y - HOOP_Y)
    }
}

/// Row-major cell index: `row * WIDTH_CELLS + col`, row 0 on the baseline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellIndex(pub usize);

impl CellIndex {
    pub fn from_col_row(col: usize, row: usize) -> Option<Self> {
        (col < WIDTH_CELLS && row < DEPTH_CELLS).then_some(CellIndex(row * WIDTH_CELLS + col))
    }

    pub fn col(self) -> usize {
        self.0 % WIDTH_CELLS
    }

    pub fn row(self) -> usize {
        self.0 / WIDTH_CELLS
    }
}

/// Points awarded for a make, 2 or 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellValue {
    Two,
    Three,
}

impl CellValue {
    pub fn points(self) -> f64 {
        match self {
            CellValue::Two => 2.0,
            CellValue::Three => 3.0,
        }
    }
}

/// Boundary predicate for the 3-point line at an arbitrary point.
pub fn is_three_point(p: Point) -> bool {
    p.hoop_distance() >= THREE_POINT_RADIUS
        || ((p.x - HOOP_X).abs() >= CORNER_THREE_X && p.y <= CORNER_THREE_DEPTH)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CourtGrid {
    pub width_cells: usize,
    pub depth_cells: usize,
    pub cell_size: f64,
    pub hoop: Point,
    values: Vec<CellValue>,
}

impl Default for CourtGrid {
    fn default() -> Self {
        Self::new()
    }
}

impl CourtGrid {
    pub fn new() -> Self {
        let mut grid = CourtGrid {
            width_cells: WIDTH_CELLS,
            depth_cells: DEPTH_CELLS,
            cell_size: 1.0,
            hoop: Point::new(HOOP_X, HOOP_Y),
            values: Vec::new(),
        };
        grid.values = grid
            .cells()
            .map(|c| {
                if is_three_point(grid.centroid(c)) {
                    CellValue::Three
                } else {
                    CellValue::Two
                }
            })
            .collect();
        grid
    }

    pub fn num_cells(&self) -> usize {
        self.width_cells * self.depth_cells
    }

    pub fn cells(&self) -> impl Iterator<Item = CellIndex> {
        (0..self.num_cells()).map(CellIndex)
    }

    pub fn cell_of(&self, p: Point) -> Option<CellIndex> {
        if !(p.x.is_finite() && p.y.is_finite()) || p.x < 0.0 || p.y < 0.0 {
            return None;
        }
        let col = (p.x / self.cell_size).floor() as usize;
        let row = (p.y / self.cell_size).floor() as usize;
        CellIndex::from_col_row(col, row)
    }

    pub fn centroid(&self, cell: CellIndex) -> Point {
        Point::new(
            (cell.col() as f64 + 0.5) * self.cell_size,
            (cell.row() as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn point_value(&self, cell: CellIndex) -> Result<CellValue> {
        self.values.get(cell.0).copied().ok_or(Error::InvalidCell(cell.0))
    }

    /// Point values for every cell in index order.
    pub fn values(&self) -> &[CellValue] {
        &self.values
    }

    pub fn hoop_cell(&self) -> CellIndex {
        self.cell_of(self.hoop).expect("hoop lies inside the grid")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionId(pub u8);

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionInfo {
    pub name: String,
    pub three_point: bool,
}

/// A total assignment of grid cells to named regions.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionPartition {
    pub name: String,
    pub regions: Vec<RegionInfo>,
    region_of_cell: Vec<RegionId>,
    /// Region receiving shots that fall outside the grid.
    pub residual: RegionId,
}

#[derive(Serialize, Deserialize)]
struct PartitionFile {
    name: String,
    regions: Vec<RegionInfo>,
    residual: RegionId,
    cells: Vec<RegionId>,
}

pub mod broad3 {
    use super::RegionId;
    pub const RESTRICTED_AREA: RegionId = RegionId(0);
    pub const MID_RANGE: RegionId = RegionId(1);
    pub const THREE_POINT: RegionId = RegionId(2);
}

pub mod empirical12 {
    use super::RegionId;
    pub const RESTRICTED_AREA: RegionId = RegionId(0);
    pub const PAINT: RegionId = RegionId(1);
    pub const MID_LEFT_BASELINE: RegionId = RegionId(2);
    pub const MID_LEFT_WING: RegionId = RegionId(3);
    pub const MID_RIGHT_WING: RegionId = RegionId(4);
    pub const MID_RIGHT_BASELINE: RegionId = RegionId(5);
    pub const LEFT_CORNER_THREE: RegionId = RegionId(6);
    pub const RIGHT_CORNER_THREE: RegionId = RegionId(7);
    pub const LEFT_ABOVE_BREAK: RegionId = RegionId(8);
    pub const CENTER_ABOVE_BREAK: RegionId = RegionId(9);
    pub const RIGHT_ABOVE_BREAK: RegionId = RegionId(10);
    pub const HEAVE: RegionId = RegionId(11);
}

fn info(name: &str, three_point: bool) -> RegionInfo {
    RegionInfo {
        name: name.to_owned(),
        three_point,
    }
}

impl RegionPartition {
    /// Restricted area, mid-range, three-point.
    pub fn broad3(grid: &CourtGrid) -> Self {
        use broad3::*;
        let cells = grid
            .cells()
            .map(|c| {
                let p = grid.centroid(c);
                if is_three_point(p) {
                    THREE_POINT
                } else if p.hoop_distance() <= RESTRICTED_AREA_RADIUS {
                    RESTRICTED_AREA
                } else {
                    MID_RANGE
                }
            })
            .collect();
        RegionPartition {
            name: "broad3".into(),
            regions: vec![
                info("restricted-area", false),
                info("mid-range", false),
                info("three-point", true),
            ],
            region_of_cell: cells,
            residual: THREE_POINT,
        }
    }

    /// Twelve histogram regions used by the empirical FG% backend.
    pub fn empirical12(grid: &CourtGrid) -> Self {
        let cells = grid
            .cells()
            .map(|c| classify_empirical12(grid.centroid(c)))
            .collect();
        RegionPartition {
            name: "empirical12".into(),
            regions: vec![
                info("restricted-area", false),
                info("paint", false),
                info("mid-left-baseline", false),
                info("mid-left-wing", false),
                info("mid-right-wing", false),
                info("mid-right-baseline", false),
                info("left-corner-three", true),
                info("right-corner-three", true),
                info("left-above-break-three", true),
                info("center-above-break-three", true),
                info("right-above-break-three", true),
                info("heave", true),
            ],
            region_of_cell: cells,
            residual: empirical12::HEAVE,
        }
    }

    pub fn by_name(name: &str, grid: &CourtGrid) -> Result<Self> {
        match name {
            "broad3" => Ok(Self::broad3(grid)),
            "empirical12" => Ok(Self::empirical12(grid)),
            other => Err(Error::UnknownStrategy {
                kind: "partition",
                name: other.to_owned(),
                registered: "broad3, empirical12".into(),
            }),
        }
    }

    pub fn num_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn region_ids(&self) -> impl Iterator<Item = RegionId> {
        (0..self.regions.len() as u8).map(RegionId)
    }

    pub fn classify(&self, cell: CellIndex) -> RegionId {
        self.region_of_cell[cell.0]
    }

    /// Region for an optional cell; off-grid locations go to the residual region.
    pub fn classify_location(&self, cell: Option<CellIndex>) -> RegionId {
        cell.map_or(self.residual, |c| self.classify(c))
    }

    pub fn region_of_cells(&self) -> &[RegionId] {
        &self.region_of_cell
    }

    pub fn is_three_point_region(&self, region: RegionId) -> bool {
        self.regions[region.0 as usize].three_point
    }

    pub fn region_name(&self, region: RegionId) -> &str {
        &self.regions[region.0 as usize].name
    }

    pub fn cells_in(&self, region: RegionId) -> impl Iterator<Item = CellIndex> + '_ {
        self.region_of_cell
            .iter()
            .enumerate()
            .filter(move |(_, r)| **r == region)
            .map(|(i, _)| CellIndex(i))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&PartitionFile {
            name: self.name.clone(),
            regions: self.regions.clone(),
            residual: self.residual,
            cells: self.region_of_cell.clone(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: PartitionFile = serde_json::from_str(s)?;
        if file.cells.len() != NUM_CELLS {
            return Err(Error::Dimension(format!(
                "partition `{}` has {} cells, expected {NUM_CELLS}",
                file.name,
                file.cells.len()
            )));
        }
        if let Some(bad) = file
            .cells
            .iter()
            .chain(std::iter::once(&file.residual))
            .find(|r| r.0 as usize >= file.regions.len())
        {
            return Err(Error::validation(format!(
                "partition `{}` references undefined region {bad}",
                file.name
            )));
        }
        Ok(RegionPartition {
            name: file.name,
            regions: file.regions,
            region_of_cell: file.cells,
            residual: file.residual,
        })
    }
}

fn classify_empirical12(p: Point) -> RegionId {
    use empirical12::*;
    let dx = p.x - HOOP_X;
    let left = dx < 0.0;
    let dist = p.hoop_distance();
    if is_three_point(p) {
        if dist >= HEAVE_RADIUS {
            HEAVE
        } else if dx.abs() >= CORNER_THREE_X && p.y <= CORNER_THREE_DEPTH {
            if left {
                LEFT_CORNER_THREE
            } else {
                RIGHT_CORNER_THREE
            }
        } else {
            // azimuth from the centerline, measured at the hoop
            let azimuth = dx.atan2(p.y - HOOP_Y).to_degrees();
            if azimuth.abs() <= 30.0 {
                CENTER_ABOVE_BREAK
            } else if left {
                LEFT_ABOVE_BREAK
            } else {
                RIGHT_ABOVE_BREAK
            }
        }
    } else if dist <= RESTRICTED_AREA_RADIUS {
        RESTRICTED_AREA
    } else if dx.abs() < LANE_HALF_WIDTH && p.y < LANE_DEPTH {
        PAINT
    } else if p.y <= CORNER_THREE_DEPTH && dx.abs() >= LANE_HALF_WIDTH {
        if left {
            MID_LEFT_BASELINE
        } else {
            MID_RIGHT_BASELINE
        }
    } else if left {
        MID_LEFT_WING
    } else {
        MID_RIGHT_WING
    }
}

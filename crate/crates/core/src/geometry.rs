//! Payoff-space geometry: feasible hull, folk region, Pareto frontiers and
//! planar projections, all in exact arithmetic.
//!
//! Hull vertices are found by linear programming: a payoff vector is a
//! vertex iff it is not a convex combination of the other distinct vectors.
//! That avoids facet enumeration and works the same for every dimension up
//! to [`MAX_DIMENSION`].

use std::io::Write;

use num_traits::Signed;
use serde::Serialize;

use crate::game::{PayoffVector, StageGame};
use crate::lp::{in_convex_hull, max_uniform_improvement};
use crate::minimax::MinimaxKind;
use crate::rational::{format_rational, Rational};
use crate::strategy::phase_profiles;

pub const MAX_DIMENSION: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("hulls are supported for at most {MAX_DIMENSION} players, game has {0}")]
    DimensionTooLarge(usize),
    #[error("expected a payoff vector of dimension {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("projection axes must be distinct, got {0} twice")]
    DuplicateAxes(usize),
    #[error("axis {0} is out of range")]
    AxisOutOfRange(usize),
    #[error("player group is empty")]
    EmptyGroup,
    #[error("point set is empty")]
    NoPoints,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffGeometry {
    dimension: usize,
    /// Distinct generating points, sorted.
    points: Vec<PayoffVector>,
    vertices: Vec<PayoffVector>,
    minimax_point: PayoffVector,
}

fn raw(points: &[PayoffVector]) -> Vec<Vec<Rational>> {
    points.iter().map(|p| p.values().to_vec()).collect()
}

fn hull_vertices(points: &[PayoffVector]) -> Vec<PayoffVector> {
    let all = raw(points);
    (0..points.len())
        .filter(|&i| {
            let others: Vec<Vec<Rational>> = all
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, p)| p.clone())
                .collect();
            !in_convex_hull(&others, &all[i])
        })
        .map(|i| points[i].clone())
        .collect()
}

impl PayoffGeometry {
    /// Convex hull of any point set in at most [`MAX_DIMENSION`] dimensions.
    pub fn from_points(
        points: Vec<PayoffVector>,
        minimax_point: PayoffVector,
    ) -> Result<Self, GeometryError> {
        let dimension = minimax_point.len();
        if dimension > MAX_DIMENSION {
            return Err(GeometryError::DimensionTooLarge(dimension));
        }
        if points.is_empty() {
            return Err(GeometryError::NoPoints);
        }
        if let Some(bad) = points.iter().find(|p| p.len() != dimension) {
            return Err(GeometryError::DimensionMismatch {
                expected: dimension,
                found: bad.len(),
            });
        }
        let mut points = points;
        points.sort();
        points.dedup();
        let vertices = hull_vertices(&points);
        Ok(PayoffGeometry {
            dimension,
            points,
            vertices,
            minimax_point,
        })
    }

    /// Hull of all stage payoff vectors, anchored at the default minimax point.
    pub fn feasible_hull(game: &StageGame) -> Result<Self, GeometryError> {
        Self::feasible_hull_with(game, MinimaxKind::default())
    }

    pub fn feasible_hull_with(game: &StageGame, kind: MinimaxKind) -> Result<Self, GeometryError> {
        if game.num_players() > MAX_DIMENSION {
            return Err(GeometryError::DimensionTooLarge(game.num_players()));
        }
        Self::from_points(game.payoff_table().to_vec(), kind.point(game))
    }

    /// Hull of the payoffs a group can realise when outsiders answer each
    /// joint action with their myopic reply. Limit averages of periodic
    /// group paths are exactly the rational points of this hull.
    pub fn group_achievable(
        game: &StageGame,
        group: &[usize],
        kind: MinimaxKind,
    ) -> Result<Self, GeometryError> {
        if group.is_empty() {
            return Err(GeometryError::EmptyGroup);
        }
        if game.num_players() > MAX_DIMENSION {
            return Err(GeometryError::DimensionTooLarge(game.num_players()));
        }
        if let Some(&bad) = group.iter().find(|&&p| p >= game.num_players()) {
            return Err(GeometryError::AxisOutOfRange(bad));
        }
        let mut group = group.to_vec();
        group.sort_unstable();
        group.dedup();
        let points = game
            .joint_actions(&group)
            .into_iter()
            .map(|joint| {
                let full = &phase_profiles(game, &group, &[joint])[0];
                game.payoff_at(game.index_of(full).expect("in range"))
                    .clone()
            })
            .collect();
        Self::from_points(points, kind.point(game))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertices(&self) -> &[PayoffVector] {
        &self.vertices
    }

    pub fn points(&self) -> &[PayoffVector] {
        &self.points
    }

    pub fn minimax_point(&self) -> &PayoffVector {
        &self.minimax_point
    }

    fn check_dim(&self, x: &PayoffVector) -> Result<(), GeometryError> {
        if x.len() != self.dimension {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dimension,
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, x: &PayoffVector) -> Result<bool, GeometryError> {
        self.check_dim(x)?;
        Ok(in_convex_hull(&raw(&self.vertices), x.values()))
    }

    /// Feasible and strictly above the minimax point in every coordinate.
    pub fn folk_region_member(&self, x: &PayoffVector) -> Result<bool, GeometryError> {
        self.check_dim(x)?;
        let above = x
            .values()
            .iter()
            .zip(self.minimax_point.values())
            .all(|(a, v)| a > v);
        Ok(above && self.contains(x)?)
    }

    /// Weak-Pareto frontier in the coordinates of `group`.
    pub fn pareto_frontier(&self, group: &[usize]) -> Result<ParetoFrontier, GeometryError> {
        if group.is_empty() {
            return Err(GeometryError::EmptyGroup);
        }
        if let Some(&bad) = group.iter().find(|&&p| p >= self.dimension) {
            return Err(GeometryError::AxisOutOfRange(bad));
        }
        let mut coords = group.to_vec();
        coords.sort_unstable();
        coords.dedup();
        let hull = raw(&self.vertices);
        let vertices = self
            .vertices
            .iter()
            .filter(|v| !max_uniform_improvement(&hull, &coords, v.values()).is_positive())
            .cloned()
            .collect();
        Ok(ParetoFrontier {
            coords,
            hull,
            vertices,
        })
    }

    /// Counter-clockwise 2D hull of the vertices projected on `axes`.
    pub fn project(&self, axes: (usize, usize)) -> Result<Vec<[Rational; 2]>, GeometryError> {
        project_points(&self.vertices, axes)
    }

    pub fn export(&self, game: &StageGame) -> GeometryExport {
        GeometryExport {
            players: game.players().to_vec(),
            dimension: self.dimension,
            minimax_point: strings(self.minimax_point.values()),
            vertices: self.vertices.iter().map(|v| strings(v.values())).collect(),
            frontier: None,
            projection: None,
        }
    }
}

/// Feasible points no feasible point improves in every coordinate of the
/// group, represented by the hull vertices that lie on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoFrontier {
    coords: Vec<usize>,
    hull: Vec<Vec<Rational>>,
    vertices: Vec<PayoffVector>,
}

impl ParetoFrontier {
    pub fn group(&self) -> &[usize] {
        &self.coords
    }

    pub fn vertices(&self) -> &[PayoffVector] {
        &self.vertices
    }

    pub fn contains(&self, x: &PayoffVector) -> bool {
        x.len() == self.hull[0].len()
            && in_convex_hull(&self.hull, x.values())
            && !max_uniform_improvement(&self.hull, &self.coords, x.values()).is_positive()
    }
}

/// Frontier of what `group` can realise with outsiders replying myopically.
pub fn group_frontier(game: &StageGame, group: &[usize]) -> Result<ParetoFrontier, GeometryError> {
    PayoffGeometry::group_achievable(game, group, MinimaxKind::default())?.pareto_frontier(group)
}

fn cross(o: &[Rational; 2], a: &[Rational; 2], b: &[Rational; 2]) -> Rational {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// Projects points onto two coordinates and returns their 2D hull in
/// counter-clockwise order starting from the leftmost (then lowest) point.
/// Collinear points are dropped; a degenerate hull yields one or two points.
pub fn project_points(
    points: &[PayoffVector],
    axes: (usize, usize),
) -> Result<Vec<[Rational; 2]>, GeometryError> {
    let (a, b) = axes;
    if a == b {
        return Err(GeometryError::DuplicateAxes(a));
    }
    for axis in [a, b] {
        if points.iter().any(|p| axis >= p.len()) {
            return Err(GeometryError::AxisOutOfRange(axis));
        }
    }
    let mut pts: Vec<[Rational; 2]> = points
        .iter()
        .map(|p| [p.get(a).clone(), p.get(b).clone()])
        .collect();
    pts.sort();
    pts.dedup();
    if pts.len() <= 2 {
        return Ok(pts);
    }
    let mut lower: Vec<[Rational; 2]> = Vec::new();
    for p in &pts {
        while lower.len() >= 2
            && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive()
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<[Rational; 2]> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive()
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    Ok(lower)
}

fn strings(values: &[Rational]) -> Vec<String> {
    values.iter().map(format_rational).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrontierExport {
    pub group: Vec<String>,
    pub vertices: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProjectionExport {
    pub axes: [String; 2],
    pub polygon: Vec<[String; 2]>,
}

/// Plotting-oriented view of a geometry. Numbers are exact `p/q` strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeometryExport {
    pub players: Vec<String>,
    pub dimension: usize,
    pub minimax_point: Vec<String>,
    pub vertices: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frontier: Option<FrontierExport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection: Option<ProjectionExport>,
}

impl GeometryExport {
    pub fn with_frontier(mut self, game: &StageGame, frontier: &ParetoFrontier) -> Self {
        self.frontier = Some(FrontierExport {
            group: frontier
                .group()
                .iter()
                .map(|&p| game.player_label(p).to_string())
                .collect(),
            vertices: frontier
                .vertices()
                .iter()
                .map(|v| strings(v.values()))
                .collect(),
        });
        self
    }

    pub fn with_projection(
        mut self,
        game: &StageGame,
        axes: (usize, usize),
        polygon: &[[Rational; 2]],
    ) -> Self {
        self.projection = Some(ProjectionExport {
            axes: [
                game.player_label(axes.0).to_string(),
                game.player_label(axes.1).to_string(),
            ],
            polygon: polygon
                .iter()
                .map(|[x, y]| [format_rational(x), format_rational(y)])
                .collect(),
        });
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("export is plain data")
    }

    /// Long-format CSV: `kind,id,<one column per player>`. Projection rows
    /// fill only the two projected columns.
    pub fn write_csv<W: Write>(&self, out: W, fmt: &dyn Fn(&str) -> String) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["kind".to_string(), "id".to_string()];
        header.extend(self.players.iter().cloned());
        w.write_record(&header)?;
        let mut row = |kind: &str, id: usize, values: Vec<String>| {
            let mut rec = vec![kind.to_string(), id.to_string()];
            rec.extend(
                values
                    .iter()
                    .map(|v| if v.is_empty() { String::new() } else { fmt(v) }),
            );
            w.write_record(&rec)
        };
        row("minimax", 0, self.minimax_point.clone())?;
        for (i, v) in self.vertices.iter().enumerate() {
            row("vertex", i, v.clone())?;
        }
        if let Some(f) = &self.frontier {
            for (i, v) in f.vertices.iter().enumerate() {
                row("frontier", i, v.clone())?;
            }
        }
        if let Some(p) = &self.projection {
            for (i, [x, y]) in p.polygon.iter().enumerate() {
                let cells = self
                    .players
                    .iter()
                    .map(|name| {
                        if *name == p.axes[0] {
                            x.clone()
                        } else if *name == p.axes[1] {
                            y.clone()
                        } else {
                            String::new()
                        }
                    })
                    .collect();
                row("polygon", i, cells)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

//! Poisson-cluster-process topologies.
//!
//! Cluster centers form a PPP (or, with a fixed cluster count, a binomial
//! point process) on a planar disk centred at the origin; every UAV sits
//! uniformly in a disk of radius `r` around its center. The BS sits on the
//! x-axis at distance `d0` from the network center.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::config::ScenarioConfig;
use crate::error::{ensure_finite, ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        debug_assert!(x.is_finite() && y.is_finite());
        Vec2 { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Vec2::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position3 {
    pub planar: Vec2,
    pub height: f64,
}

impl Position3 {
    pub fn new(planar: Vec2, height: f64) -> Self {
        debug_assert!(height >= 0.0);
        Position3 { planar, height }
    }

    pub fn distance(&self, other: &Position3) -> f64 {
        let dz = self.height - other.height;
        let planar = self.planar.distance(other.planar);
        (planar * planar + dz * dz).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeploymentMode {
    /// Exactly `total_uavs` UAVs split over exactly `num_clusters` clusters.
    #[default]
    FixedTotal,
    /// PPP cluster count with `floor(lambda_off * pi * r^2)` UAVs per cluster.
    Density,
}

impl DeploymentMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DeploymentMode::FixedTotal => "fixed_total",
            DeploymentMode::Density => "density",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub center: Position3,
    pub members: Vec<Position3>,
    pub radius_r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub clusters: Vec<Cluster>,
    pub bs_position: Position3,
    pub region_radius: f64,
    pub parent_density_lambda: f64,
    pub mode: DeploymentMode,
}

/// A UAV's place in a [`Topology`], with a dense global id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavRef {
    pub id: usize,
    pub cluster: usize,
    pub position: Position3,
}

impl Topology {
    pub fn uav_count(&self) -> usize {
        self.clusters.iter().map(|c| c.members.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.uav_count() == 0
    }

    /// UAVs in cluster order; ids are assigned consecutively.
    pub fn uavs(&self) -> Vec<UavRef> {
        let mut out = Vec::with_capacity(self.uav_count());
        for (cluster, c) in self.clusters.iter().enumerate() {
            for &position in &c.members {
                out.push(UavRef { id: out.len(), cluster, position });
            }
        }
        out
    }

    /// Planar distance from a cluster center to the BS (the `‖v‖` of that
    /// cluster).
    pub fn v_norm(&self, cluster: usize) -> f64 {
        self.clusters[cluster].center.planar.distance(self.bs_position.planar)
    }
}

/// Number of UAVs in a cluster of radius `r` at offspring density
/// `lambda_off`, i.e. `floor(lambda_off * pi * r^2)`. Values within 1e-9
/// below an integer are rounded up so that radii derived from an exact
/// target count do not lose a member to floating-point error.
pub fn offspring_count(lambda_off: f64, radius_r: f64) -> u64 {
    let x = lambda_off * PI * radius_r * radius_r;
    let floor = x.floor();
    if x - floor > 1.0 - 1e-9 {
        floor as u64 + 1
    } else {
        floor as u64
    }
}

fn uniform_in_disk<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> Vec2 {
    // inverse CDF of the radial law a^2 / r^2
    let a = radius * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    Vec2::from_polar(a, theta)
}

/// PPP of intensity `lambda` restricted to the disk of radius
/// `region_radius` about the origin.
pub fn sample_parent_centers<R: Rng + ?Sized>(region_radius: f64, lambda: f64, rng: &mut R) -> Result<Vec<Vec2>> {
    ensure_positive("region_radius", region_radius)?;
    ensure_positive("lambda", lambda)?;
    let mean = lambda * PI * region_radius * region_radius;
    let poisson =
        Poisson::new(mean).map_err(|e| Error::config("lambda", format!("invalid Poisson mean {mean}: {e}")))?;
    let count = poisson.sample(rng) as usize;
    Ok((0..count).map(|_| uniform_in_disk(region_radius, rng)).collect())
}

/// Exactly `count` centers uniform on the region disk.
pub fn sample_binomial_centers<R: Rng + ?Sized>(region_radius: f64, count: usize, rng: &mut R) -> Result<Vec<Vec2>> {
    ensure_positive("region_radius", region_radius)?;
    Ok((0..count).map(|_| uniform_in_disk(region_radius, rng)).collect())
}

pub fn sample_cluster_members<R: Rng + ?Sized>(
    center: Position3,
    radius_r: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Position3>> {
    ensure_positive("radius_r", radius_r)?;
    if count == 0 {
        return Err(Error::config("count", "cluster member count must be >= 1"));
    }
    Ok((0..count).map(|_| Position3::new(center.planar + uniform_in_disk(radius_r, rng), center.height)).collect())
}

/// Splits `total` into `parts` counts differing by at most one, larger
/// counts first.
pub fn even_split(total: usize, parts: usize) -> Vec<usize> {
    let base = total / parts;
    let extra = total % parts;
    (0..parts).map(|i| base + usize::from(i < extra)).collect()
}

/// Draws one topology for `config`. The config is assumed validated.
pub fn build_topology<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Topology> {
    ensure_positive("region_radius", config.region_radius)?;
    ensure_finite("h2", config.h2)?;
    let radius_r = config.effective_radius()?;
    if config.d0 <= config.region_radius + radius_r {
        return Err(Error::config(
            "d0",
            format!("far deployment requires d0 > region_radius + r ({} + {radius_r})", config.region_radius),
        ));
    }

    let (centers, counts) = match config.mode {
        DeploymentMode::FixedTotal => {
            if config.num_clusters == 0 {
                return Err(Error::config("num_clusters", "must be >= 1"));
            }
            if config.total_uavs < config.num_clusters {
                return Err(Error::config("total_uavs", "must be >= num_clusters so that no cluster is empty"));
            }
            let centers = sample_binomial_centers(config.region_radius, config.num_clusters, rng)?;
            (centers, even_split(config.total_uavs, config.num_clusters))
        }
        DeploymentMode::Density => {
            let per_cluster = offspring_count(config.lambda_off, radius_r) as usize;
            if per_cluster == 0 {
                return Err(Error::config("lambda_off", "floor(lambda_off * pi * r^2) is 0; clusters would be empty"));
            }
            let centers = sample_parent_centers(config.region_radius, config.lambda, rng)?;
            let n = centers.len();
            (centers, vec![per_cluster; n])
        }
    };

    let mut clusters = Vec::with_capacity(centers.len());
    for (planar, count) in centers.into_iter().zip(counts) {
        let center = Position3::new(planar, config.h2);
        let members = sample_cluster_members(center, radius_r, count, rng)?;
        clusters.push(Cluster { center, members, radius_r });
    }

    Ok(Topology {
        clusters,
        bs_position: Position3::new(Vec2::new(config.d0, 0.0), config.h1),
        region_radius: config.region_radius,
        parent_density_lambda: config.lambda,
        mode: config.mode,
    })
}

/// Writes `drop_id,cluster_id,uav_id,x,y,h` rows.
pub fn write_topology_csv<W: Write>(out: W, drops: &[(usize, &Topology)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["drop_id", "cluster_id", "uav_id", "x", "y", "h"])?;
    for (drop_id, topology) in drops {
        for uav in topology.uavs() {
            w.write_record([
                drop_id.to_string(),
                uav.cluster.to_string(),
                uav.id.to_string(),
                uav.position.planar.x.to_string(),
                uav.position.planar.y.to_string(),
                uav.position.height.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

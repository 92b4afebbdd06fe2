//! Conditional distance distributions inside a Poisson cluster.
//!
//! * `d̂1`: planar distance from the BS to a UAV uniform in a disk of radius
//!   `r` whose center is `‖v‖` away from the BS.
//! * `d1`: the same distance including the BS/UAV height difference.
//! * `d2`: distance from a UAV at offset `a` from its cluster center to
//!   another UAV uniform in the same disk.
//! * `a`: distance from a uniform UAV to its cluster center.
//!
//! All densities return 0 outside their support. The `d̂1`/`d1` forms assume
//! the BS lies outside the cluster disk (`‖v‖ > r`).

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::geometry::Vec2;
use crate::quadrature::try_integrate_with_breaks;

/// Minimum number of CDF table cells.
pub const CDF_GRID_CELLS: usize = 2048;
const CELL_TOLERANCE: f64 = 1e-13;
const NORMALIZATION_TOLERANCE: f64 = 1e-4;
const ARCCOS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterGeometry {
    pub v_norm: f64,
    pub radius_r: f64,
    pub h1: f64,
    pub h2: f64,
}

impl ClusterGeometry {
    pub fn new(v_norm: f64, radius_r: f64, h1: f64, h2: f64) -> Result<Self> {
        ensure_positive("radius_r", radius_r)?;
        ensure_finite("v_norm", v_norm)?;
        ensure_finite("h1", h1)?;
        ensure_finite("h2", h2)?;
        if v_norm <= radius_r {
            return Err(Error::config(
                "v_norm",
                format!("far deployment requires v_norm > radius_r ({v_norm} <= {radius_r})"),
            ));
        }
        if h1 < 0.0 || h2 < 0.0 {
            return Err(Error::config("h1/h2", "heights must be >= 0"));
        }
        Ok(ClusterGeometry { v_norm, radius_r, h1, h2 })
    }

    pub fn height_gap_sq(&self) -> f64 {
        let dh = self.h1 - self.h2;
        dh * dh
    }

    pub fn d1_hat_support(&self) -> (f64, f64) {
        (self.v_norm - self.radius_r, self.v_norm + self.radius_r)
    }

    pub fn d1_support(&self) -> (f64, f64) {
        let (lo, hi) = self.d1_hat_support();
        let dh2 = self.height_gap_sq();
        ((lo * lo + dh2).sqrt(), (hi * hi + dh2).sqrt())
    }
}

/// Angle `arccos((ρ² + c² − r²) / (2cρ))` subtended by the part of the
/// circle of radius `ρ` (centered `c` away from the disk center) that lies
/// inside the disk of radius `r`.
///
/// `1 ± cos` are formed as products of differences, so the result stays
/// accurate where the argument approaches ±1 — the ring barely touching
/// the disk boundary — instead of losing half its digits to cancellation.
/// Excursions past the valid range beyond `ARCCOS_SLACK` are reported.
fn ring_angle(rho: f64, c: f64, radius_r: f64) -> Result<f64> {
    let denom = 2.0 * c * rho;
    let one_plus = (rho + c - radius_r) * (rho + c + radius_r) / denom;
    let one_minus = (radius_r - rho + c) * (radius_r + rho - c) / denom;
    if one_plus < -ARCCOS_SLACK || one_minus < -ARCCOS_SLACK {
        return Err(Error::Integrity(format!(
            "ring of radius {rho} at offset {c} does not meet the disk of radius {radius_r}"
        )));
    }
    Ok(2.0 * one_minus.max(0.0).sqrt().atan2(one_plus.max(0.0).sqrt()))
}

/// `(2d / (π r²)) · angle`, the density shared by every ring–disk
/// intersection law.
fn ring_density(d: f64, angle: f64, radius_r: f64) -> f64 {
    (2.0 * d / (PI * radius_r * radius_r) * angle).max(0.0)
}

pub fn pdf_d1_hat(d1_hat: f64, geom: &ClusterGeometry) -> Result<f64> {
    let (lo, hi) = geom.d1_hat_support();
    if !(lo..=hi).contains(&d1_hat) || d1_hat <= 0.0 {
        return Ok(0.0);
    }
    let v = geom.v_norm;
    let r = geom.radius_r;
    Ok(ring_density(d1_hat, ring_angle(d1_hat, v, r)?, r))
}

pub fn pdf_d1(d1: f64, geom: &ClusterGeometry) -> Result<f64> {
    let (lo, hi) = geom.d1_support();
    if !(lo..=hi).contains(&d1) {
        return Ok(0.0);
    }
    let planar_sq = (d1 * d1 - geom.height_gap_sq()).max(0.0);
    let planar = planar_sq.sqrt();
    if planar == 0.0 {
        return Ok(0.0);
    }
    let v = geom.v_norm;
    let r = geom.radius_r;
    Ok(ring_density(d1, ring_angle(planar, v, r)?, r))
}

/// Density of `d2` given the typical UAV sits `a` from the cluster center.
/// For `d2 <= r - a` the whole circle of radius `d2` lies in the disk and
/// the density is `2 d2 / r²`; beyond that only an arc does.
pub fn pdf_d2(d2: f64, a: f64, radius_r: f64) -> Result<f64> {
    ensure_positive("radius_r", radius_r)?;
    if !(0.0..=radius_r).contains(&a) {
        return Err(Error::config("a", format!("offset a must lie in [0, r], got {a} (r = {radius_r})")));
    }
    if !(0.0..=radius_r + a).contains(&d2) {
        return Ok(0.0);
    }
    if d2 <= radius_r - a {
        return Ok(2.0 * d2 / (radius_r * radius_r));
    }
    Ok(ring_density(d2, ring_angle(d2, a, radius_r)?, radius_r))
}

/// Density of the distance from a uniform point in a disk to its center.
pub fn pdf_a(a: f64, radius_r: f64) -> f64 {
    if (0.0..=radius_r).contains(&a) {
        2.0 * a / (radius_r * radius_r)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    D1Hat,
    D1,
    D2,
    A,
}

impl DistanceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DistanceKind::D1Hat => "d1_hat",
            DistanceKind::D1 => "d1",
            DistanceKind::D2 => "d2",
            DistanceKind::A => "a",
        }
    }
}

type PdfFn = dyn Fn(f64) -> Result<f64> + Send + Sync;

/// A distance density with a tabulated CDF for evaluation and sampling.
/// Immutable after construction.
#[derive(Clone)]
pub struct ConditionalDistanceDistribution {
    pub kind: DistanceKind,
    pub support_lo: f64,
    pub support_hi: f64,
    pdf: Arc<PdfFn>,
    /// Integral of the raw density before the table is renormalized.
    total_mass: f64,
    cdf: Vec<f64>,
}

impl std::fmt::Debug for ConditionalDistanceDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConditionalDistanceDistribution")
            .field("kind", &self.kind)
            .field("support_lo", &self.support_lo)
            .field("support_hi", &self.support_hi)
            .field("total_mass", &self.total_mass)
            .field("cells", &self.cells())
            .finish()
    }
}

impl ConditionalDistanceDistribution {
    pub fn d1_hat(geom: ClusterGeometry) -> Result<Self> {
        let (lo, hi) = geom.d1_hat_support();
        Self::from_pdf(DistanceKind::D1Hat, lo, hi, &[], move |x| pdf_d1_hat(x, &geom))
    }

    pub fn d1(geom: ClusterGeometry) -> Result<Self> {
        let (lo, hi) = geom.d1_support();
        Self::from_pdf(DistanceKind::D1, lo, hi, &[], move |x| pdf_d1(x, &geom))
    }

    pub fn d2(a: f64, radius_r: f64) -> Result<Self> {
        pdf_d2(0.0, a, radius_r)?;
        Self::from_pdf(DistanceKind::D2, 0.0, radius_r + a, &[radius_r - a], move |x| pdf_d2(x, a, radius_r))
    }

    pub fn a(radius_r: f64) -> Result<Self> {
        ensure_positive("radius_r", radius_r)?;
        Self::from_pdf(DistanceKind::A, 0.0, radius_r, &[], move |x| Ok(pdf_a(x, radius_r)))
    }

    /// Tabulates an arbitrary density on `[lo, hi]`. `kinks` are interior
    /// points where the density is not smooth; they are used as quadrature
    /// break points. Fails with an integrity error if the density does not
    /// integrate to 1 within 1e-4.
    pub fn from_pdf<F>(kind: DistanceKind, lo: f64, hi: f64, kinks: &[f64], pdf: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::config("support", format!("invalid support [{lo}, {hi}]")));
        }
        let pdf: Arc<PdfFn> = Arc::new(pdf);
        if lo == hi {
            return Ok(ConditionalDistanceDistribution {
                kind,
                support_lo: lo,
                support_hi: hi,
                pdf,
                total_mass: 1.0,
                cdf: vec![0.0, 1.0],
            });
        }

        let cells = CDF_GRID_CELLS;
        let step = (hi - lo) / cells as f64;

        let mut cumulative = Vec::with_capacity(cells + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        let mut breaks = Vec::with_capacity(4);
        for i in 0..cells {
            let a = lo + step * i as f64;
            let b = if i + 1 == cells { hi } else { lo + step * (i + 1) as f64 };
            breaks.clear();
            breaks.push(a);
            breaks.extend(kinks.iter().copied().filter(|&k| k > a && k < b));
            breaks.push(b);
            acc += try_integrate_with_breaks(|x| pdf(x), &breaks, CELL_TOLERANCE)?.value;
            cumulative.push(acc);
        }
        if (acc - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Integrity(format!("{} density integrates to {acc} over [{lo}, {hi}]", kind.as_str())));
        }
        for c in &mut cumulative {
            *c /= acc;
        }
        Ok(ConditionalDistanceDistribution {
            kind,
            support_lo: lo,
            support_hi: hi,
            pdf,
            total_mass: acc,
            cdf: cumulative,
        })
    }

    pub fn cells(&self) -> usize {
        self.cdf.len() - 1
    }

    /// Integral of the density as computed during tabulation.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        (self.pdf)(x)
    }

    pub fn grid_point(&self, i: usize) -> f64 {
        if i == self.cells() {
            self.support_hi
        } else {
            self.support_lo + (self.support_hi - self.support_lo) * i as f64 / self.cells() as f64
        }
    }

    /// Tabulated CDF, linear between grid nodes.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.support_lo {
            return 0.0;
        }
        if x >= self.support_hi {
            return 1.0;
        }
        let width = self.support_hi - self.support_lo;
        let pos = (x - self.support_lo) / width * self.cells() as f64;
        let i = (pos.floor() as usize).min(self.cells() - 1);
        let t = pos - i as f64;
        self.cdf[i] + t * (self.cdf[i + 1] - self.cdf[i])
    }

    /// Inverse of the tabulated CDF.
    pub fn quantile(&self, u: f64) -> f64 {
        if self.support_lo == self.support_hi || u <= 0.0 {
            return self.support_lo;
        }
        if u >= 1.0 {
            return self.support_hi;
        }
        // first node with cdf >= u
        let j = self.cdf.partition_point(|&c| c < u).max(1);
        let (c0, c1) = (self.cdf[j - 1], self.cdf[j]);
        let (x0, x1) = (self.grid_point(j - 1), self.grid_point(j));
        if c1 <= c0 {
            return x0;
        }
        x0 + (u - c0) / (c1 - c0) * (x1 - x0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    /// Sup-norm distance between the tabulated CDF and the empirical CDF of
    /// `n` draws from [`Self::sample`].
    pub fn ks_self_check<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> f64 {
        let samples = (0..n).map(|_| self.sample(rng)).collect();
        ks_gap(samples, |x| self.cdf(x))
    }

    /// `(x, pdf, cdf)` at every grid node.
    pub fn table(&self) -> Result<Vec<(f64, f64, f64)>> {
        (0..=self.cells())
            .map(|i| {
                let x = self.grid_point(i);
                Ok((x, self.pdf(x)?, self.cdf[i]))
            })
            .collect()
    }
}

/// Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_gap<F: Fn(f64) -> f64>(mut samples: Vec<f64>, cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples.iter().enumerate().fold(0.0_f64, |gap, (i, &x)| {
        let f = cdf(x);
        gap.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    })
}

/// Which distance to validate, with the conditioning it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceQuery {
    D1Hat(ClusterGeometry),
    D1(ClusterGeometry),
    D2 { a: f64, radius_r: f64 },
    A { radius_r: f64 },
}

impl DistanceQuery {
    pub fn kind(&self) -> DistanceKind {
        match self {
            DistanceQuery::D1Hat(_) => DistanceKind::D1Hat,
            DistanceQuery::D1(_) => DistanceKind::D1,
            DistanceQuery::D2 { .. } => DistanceKind::D2,
            DistanceQuery::A { .. } => DistanceKind::A,
        }
    }

    pub fn distribution(&self) -> Result<ConditionalDistanceDistribution> {
        match *self {
            DistanceQuery::D1Hat(g) => ConditionalDistanceDistribution::d1_hat(g),
            DistanceQuery::D1(g) => ConditionalDistanceDistribution::d1(g),
            DistanceQuery::D2 { a, radius_r } => ConditionalDistanceDistribution::d2(a, radius_r),
            DistanceQuery::A { radius_r } => ConditionalDistanceDistribution::a(radius_r),
        }
    }

    /// Draws one distance by building the geometry explicitly: a uniform
    /// point in the cluster disk, measured from the BS or from the typical
    /// UAV.
    pub fn sample_geometric<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let uniform_disk = |radius: f64, rng: &mut R| {
            let rho = radius * rng.random::<f64>().sqrt();
            Vec2::from_polar(rho, 2.0 * PI * rng.random::<f64>())
        };
        match *self {
            DistanceQuery::D1Hat(g) | DistanceQuery::D1(g) => {
                // BS at the origin, cluster center on the x-axis
                let uav = Vec2::new(g.v_norm, 0.0) + uniform_disk(g.radius_r, rng);
                let planar = uav.norm();
                if matches!(self, DistanceQuery::D1Hat(_)) {
                    planar
                } else {
                    (planar * planar + g.height_gap_sq()).sqrt()
                }
            }
            DistanceQuery::D2 { a, radius_r } => {
                let typical = Vec2::new(a, 0.0);
                uniform_disk(radius_r, rng).distance(typical)
            }
            DistanceQuery::A { radius_r } => uniform_disk(radius_r, rng).norm(),
        }
    }
}

/// Sup-norm gap between the quadrature CDF of `query` and the empirical
/// CDF of `n_samples` geometric draws.
pub fn empirical_distance_check<R: Rng + ?Sized>(query: &DistanceQuery, n_samples: usize, rng: &mut R) -> Result<f64> {
    if n_samples < 1000 {
        return Err(Error::config("n_samples", "empirical check needs at least 1000 samples"));
    }
    let dist = query.distribution()?;
    let samples = (0..n_samples).map(|_| query.sample_geometric(rng)).collect();
    Ok(ks_gap(samples, |x| dist.cdf(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use crate::rng::seeded;

    fn geom(v: f64, r: f64, h1: f64, h2: f64) -> ClusterGeometry {
        ClusterGeometry::new(v, r, h1, h2).unwrap()
    }

    #[test]
    fn d1_hat_vanishes_at_support_ends() {
        let g = geom(800.0, 50.0, 10.0, 20.0);
        assert!(pdf_d1_hat(850.0, &g).unwrap().abs() < 1e-6);
        assert!(pdf_d1_hat(750.0, &g).unwrap().abs() < 1e-6);
        assert_eq!(pdf_d1_hat(700.0, &g).unwrap(), 0.0);
        assert_eq!(pdf_d1_hat(900.0, &g).unwrap(), 0.0);
    }

    #[test]
    fn d1_support_endpoints_vanish() {
        let g = geom(800.0, 50.0, 10.0, 20.0);
        let (lo, hi) = g.d1_support();
        assert!(pdf_d1(lo, &g).unwrap().abs() < 1e-6);
        assert!(pdf_d1(hi, &g).unwrap().abs() < 1e-6);
    }

    #[test]
    fn d1_equals_d1_hat_without_height_gap() {
        let g = geom(400.0, 50.0, 20.0, 20.0);
        for i in 0..=1000 {
            let d = 350.0 + 100.0 * i as f64 / 1000.0;
            let a = pdf_d1(d, &g).unwrap();
            let b = pdf_d1_hat(d, &g).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{d}: {a} {b}");
        }
    }

    #[test]
    fn d1_normalized_for_table_heights() {
        let g = geom(800.0, 50.0, 10.0, 20.0);
        let (lo, hi) = g.d1_support();
        let mass = integrate(|x| pdf_d1(x, &g).unwrap(), lo, hi, 1e-12).unwrap().value;
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
    }

    #[test]
    fn d2_branches_meet_continuously() {
        let r = 50.0;
        for frac in [0.1, 0.5, 0.9] {
            let a = frac * r;
            let junction = r - a;
            let inner = pdf_d2(junction, a, r).unwrap();
            assert!((inner - 2.0 * junction / (r * r)).abs() < 1e-15);
            assert!((ring_angle(junction, a, r).unwrap() - PI).abs() < 1e-6);
            let outer = ring_density(junction, PI, r);
            assert!((inner - outer).abs() < 1e-9, "{inner} {outer}");
            let right = pdf_d2(junction + 1e-9, a, r).unwrap();
            assert!((right - inner).abs() < 1e-6);
        }
    }

    #[test]
    fn d2_at_center_is_linear() {
        let r = 50.0;
        for i in 0..=50 {
            let d = i as f64;
            assert!((pdf_d2(d, 0.0, r).unwrap() - 2.0 * d / (r * r)).abs() < 1e-15);
        }
        assert_eq!(pdf_d2(50.5, 0.0, r).unwrap(), 0.0);
    }

    #[test]
    fn d2_offset_beyond_radius_is_error() {
        assert!(matches!(pdf_d2(10.0, 60.0, 50.0), Err(Error::Config { .. })));
    }

    #[test]
    fn pdf_a_endpoints() {
        assert_eq!(pdf_a(50.0, 50.0), 2.0 / 50.0);
        assert_eq!(pdf_a(0.0, 50.0), 0.0);
        assert_eq!(pdf_a(51.0, 50.0), 0.0);
    }

    #[test]
    fn ring_angle_matches_arccos_and_rejects_disjoint_rings() {
        for (rho, c, r) in [(30.0, 20.0, 40.0), (800.0, 810.0, 50.0), (5.0, 3.0, 7.0)] {
            let direct = ((rho * rho + c * c - r * r) / (2.0 * c * rho) as f64).acos();
            assert!((ring_angle(rho, c, r).unwrap() - direct).abs() < 1e-12);
        }
        assert_eq!(ring_angle(850.0, 800.0, 50.0).unwrap(), 0.0);
        assert!(matches!(ring_angle(900.0, 800.0, 50.0), Err(Error::Integrity(_))));
    }

    #[test]
    fn near_deployment_rejected() {
        assert!(ClusterGeometry::new(100.0, 200.0, 10.0, 20.0).is_err());
        assert!(ClusterGeometry::new(50.0, 50.0, 10.0, 20.0).is_err());
    }

    #[test]
    fn densities_non_negative_on_grid() {
        let g = geom(600.0, 80.0, 10.0, 20.0);
        let (lo, hi) = g.d1_support();
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            assert!(pdf_d1(lo + t * (hi - lo), &g).unwrap() >= 0.0);
            assert!(pdf_d1_hat(520.0 + 160.0 * t, &g).unwrap() >= 0.0);
            assert!(pdf_d2(130.0 * t, 50.0, 80.0).unwrap() >= 0.0);
            assert!(pdf_a(80.0 * t, 80.0) >= 0.0);
        }
    }

    #[test]
    fn tabulated_a_mean_matches_moment() {
        // E[a] = ∫ a · 2a/r² da = 2r/3
        let dist = ConditionalDistanceDistribution::a(50.0).unwrap();
        let mut rng = seeded(21);
        let n = 100_000;
        let mean = (0..n).map(|_| dist.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 100.0 / 3.0).abs() < 0.1, "{mean}");
        assert!(dist.cells() >= 2048);
    }

    #[test]
    fn tabulated_d2_at_center_mean() {
        let dist = ConditionalDistanceDistribution::d2(0.0, 50.0).unwrap();
        let mut rng = seeded(22);
        let n = 100_000;
        let mean = (0..n).map(|_| dist.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 100.0 / 3.0).abs() < 0.1, "{mean}");
    }

    #[test]
    fn degenerate_support_returns_lo() {
        let dist = ConditionalDistanceDistribution::from_pdf(DistanceKind::A, 3.0, 3.0, &[], |_| Ok(0.0)).unwrap();
        let mut rng = seeded(23);
        assert_eq!(dist.sample(&mut rng), 3.0);
        assert_eq!(dist.quantile(0.7), 3.0);
    }

    #[test]
    fn unnormalized_density_is_integrity_error() {
        let err = ConditionalDistanceDistribution::from_pdf(DistanceKind::A, 0.0, 1.0, &[], |_| Ok(2.0)).unwrap_err();
        assert!(matches!(err, Error::Integrity(_)));
    }

    #[test]
    fn pdf_errors_surface_from_tabulation() {
        let err = ConditionalDistanceDistribution::from_pdf(DistanceKind::A, 0.0, 1.0, &[], |x| {
            if x > 0.5 {
                Err(Error::Integrity("boom".into()))
            } else {
                Ok(1.0)
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Integrity(ref m) if m == "boom"));
    }

    #[test]
    fn ks_self_check_small() {
        let mut rng = seeded(24);
        for dist in [
            ConditionalDistanceDistribution::d1(geom(800.0, 50.0, 10.0, 20.0)).unwrap(),
            ConditionalDistanceDistribution::d2(25.0, 50.0).unwrap(),
            ConditionalDistanceDistribution::a(50.0).unwrap(),
        ] {
            let gap = dist.ks_self_check(100_000, &mut rng);
            assert!(gap < 0.01, "{:?}: {gap}", dist.kind);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let dist = ConditionalDistanceDistribution::d2(30.0, 50.0).unwrap();
        for i in 1..100 {
            let u = i as f64 / 100.0;
            assert!((dist.cdf(dist.quantile(u)) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn empirical_checks_within_ks_bounds() {
        let mut rng = seeded(25);
        let g = geom(800.0, 50.0, 10.0, 20.0);
        assert!(empirical_distance_check(&DistanceQuery::D1(g), 10_000, &mut rng).unwrap() < 0.02);
        assert!(empirical_distance_check(&DistanceQuery::D1Hat(g), 10_000, &mut rng).unwrap() < 0.02);
        let d2 = DistanceQuery::D2 { a: 25.0, radius_r: 50.0 };
        assert!(empirical_distance_check(&d2, 1_000_000, &mut rng).unwrap() < 0.005);
        let a = DistanceQuery::A { radius_r: 50.0 };
        assert!(empirical_distance_check(&a, 100_000, &mut rng).unwrap() < 0.01);
    }

    #[test]
    fn d1_hat_histogram_at_800() {
        let mut rng = seeded(26);
        let g = geom(800.0, 50.0, 10.0, 20.0);
        let gap = empirical_distance_check(&DistanceQuery::D1Hat(g), 1_000_000, &mut rng).unwrap();
        assert!(gap < 0.005, "{gap}");
    }

    #[test]
    fn empirical_check_needs_samples() {
        let mut rng = seeded(27);
        assert!(empirical_distance_check(&DistanceQuery::A { radius_r: 1.0 }, 999, &mut rng).is_err());
    }
}

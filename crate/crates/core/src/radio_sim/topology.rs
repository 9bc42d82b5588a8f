use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{AuctionError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Street layout. The road runs along the x axis, centered on the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub road_length_m: f64,
    pub road_width_m: f64,
    pub apartment_size_m: f64,
    /// Macro base station sits this far north of the road center.
    pub macro_offset_m: f64,
    pub fues_per_femto: usize,
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry {
            road_length_m: 240.0,
            road_width_m: 10.0,
            apartment_size_m: 15.0,
            macro_offset_m: 300.0,
            fues_per_femto: 3,
        }
    }
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("topology.road_length_m", self.road_length_m),
            ("topology.apartment_size_m", self.apartment_size_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(AuctionError::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("topology.road_width_m", self.road_width_m),
            ("topology.macro_offset_m", self.macro_offset_m),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(AuctionError::Domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.apartments_per_side() == 0 {
            return Err(AuctionError::Domain("apartments are longer than the road".into()));
        }
        Ok(())
    }

    pub fn apartments_per_side(&self) -> usize {
        (self.road_length_m / self.apartment_size_m + 1e-9).floor() as usize
    }

    /// North side first, west to east, then the south side.
    pub fn apartments(&self) -> Vec<Apartment> {
        let per_side = self.apartments_per_side();
        let s = self.apartment_size_m;
        let west = -self.road_length_m / 2.0;
        let half_road = self.road_width_m / 2.0;
        let mut out = Vec::with_capacity(2 * per_side);
        for y0 in [half_road, -half_road - s] {
            for k in 0..per_side {
                out.push(Apartment {
                    min: Point::new(west + k as f64 * s, y0),
                    size: s,
                });
            }
        }
        out
    }

    pub fn macro_bs(&self) -> Point {
        Point::new(0.0, self.macro_offset_m)
    }
}

/// Axis-aligned square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Apartment {
    pub min: Point,
    pub size: f64,
}

impl Apartment {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.min.x + self.size && p.y >= self.min.y && p.y <= self.min.y + self.size
    }

    fn sample(&self, rng: &mut impl Rng) -> Point {
        Point::new(
            self.min.x + rng.random::<f64>() * self.size,
            self.min.y + rng.random::<f64>() * self.size,
        )
    }

    /// Parameters `t` in `(0, 1)` where `a + t (b - a)` crosses this
    /// square's boundary, by Liang-Barsky clipping. Grazing contact along
    /// an edge does not count.
    fn crossings(&self, a: Point, b: Point, out: &mut Vec<f64>) {
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        let max = Point::new(self.min.x + self.size, self.min.y + self.size);
        for (p, q) in [
            (-dx, a.x - self.min.x),
            (dx, max.x - a.x),
            (-dy, a.y - self.min.y),
            (dy, max.y - a.y),
        ] {
            if p == 0.0 {
                if q <= 0.0 {
                    return;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
        if t1 - t0 <= 1e-12 {
            return;
        }
        if t0 > 0.0 {
            out.push(t0);
        }
        if t1 < 1.0 {
            out.push(t1);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Femtocell {
    pub apartment: usize,
    pub position: Point,
    pub fues: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub geometry: Geometry,
    pub apartments: Vec<Apartment>,
    pub femtos: Vec<Femtocell>,
    pub mues: Vec<Point>,
    pub macro_bs: Point,
}

impl Topology {
    /// Hand-placed scenario. Every femtocell and its FUEs must lie in the
    /// named apartment.
    pub fn from_parts(geometry: Geometry, femtos: Vec<Femtocell>, mues: Vec<Point>) -> Result<Self> {
        geometry.validate()?;
        let apartments = geometry.apartments();
        for (j, f) in femtos.iter().enumerate() {
            let apt = apartments
                .get(f.apartment)
                .ok_or_else(|| AuctionError::Domain(format!("femtocell {j} names apartment {}", f.apartment)))?;
            if !apt.contains(f.position) || !f.fues.iter().all(|p| apt.contains(*p)) {
                return Err(AuctionError::Domain(format!(
                    "femtocell {j} or one of its FUEs lies outside apartment {}",
                    f.apartment
                )));
            }
        }
        Ok(Topology {
            macro_bs: geometry.macro_bs(),
            geometry,
            apartments,
            femtos,
            mues,
        })
    }

    pub fn fue_count(&self) -> usize {
        self.femtos.iter().map(|f| f.fues.len()).sum()
    }

    /// Distinct apartment walls crossed by the straight link `a -> b`.
    /// Shared walls between neighbours count once.
    pub fn walls_between(&self, a: Point, b: Point) -> usize {
        let mut ts = Vec::new();
        for apt in &self.apartments {
            apt.crossings(a, b, &mut ts);
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
        ts.len()
    }
}

/// Random street: each apartment hosts a femtocell with probability
/// `density`, femtocells and FUEs sit uniformly inside their apartment and
/// MUEs uniformly on the road centerline.
pub fn generate_topology(geometry: &Geometry, density: f64, num_mues: usize, seed: u64) -> Result<Topology> {
    generate_topology_with(geometry, density, num_mues, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn generate_topology_with(
    geometry: &Geometry,
    density: f64,
    num_mues: usize,
    rng: &mut impl Rng,
) -> Result<Topology> {
    if !(0.0..=1.0).contains(&density) {
        return Err(AuctionError::Domain(format!("femto density must be in [0, 1], got {density}")));
    }
    if num_mues == 0 {
        return Err(AuctionError::Domain("a scenario needs at least one MUE".into()));
    }
    geometry.validate()?;
    let apartments = geometry.apartments();
    let mut femtos = Vec::new();
    for (k, apt) in apartments.iter().enumerate() {
        // Draw unconditionally so the layout of one apartment does not
        // depend on whether its neighbours got a femtocell.
        let hosts = rng.random::<f64>() < density;
        let position = apt.sample(rng);
        let fues: Vec<Point> = (0..geometry.fues_per_femto).map(|_| apt.sample(rng)).collect();
        if hosts {
            femtos.push(Femtocell {
                apartment: k,
                position,
                fues,
            });
        }
    }
    let half = geometry.road_length_m / 2.0;
    let mues = (0..num_mues)
        .map(|_| Point::new(rng.random_range(-half..=half), 0.0))
        .collect();
    Ok(Topology {
        macro_bs: geometry.macro_bs(),
        geometry: geometry.clone(),
        apartments,
        femtos,
        mues,
    })
}

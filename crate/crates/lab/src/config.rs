//! Experiment configuration, read from JSON with every field optional.

use serde::{Deserialize, Serialize};
use tembed_core::domain::XiFunction;
use tembed_core::C64;
use tembed_surface::plateau::MeshConfig;

use crate::pipeline::{Family, SolverSettings};

/// Points `v_{k,1}, v_{k,2}` for each `k`, in coordinates of the limit domain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointTuple {
    pub name: String,
    pub pairs: Vec<[[f64; 2]; 2]>,
}

impl PointTuple {
    pub fn points(&self) -> Vec<[C64; 2]> {
        self.pairs
            .iter()
            .map(|p| [C64::new(p[0][0], p[0][1]), C64::new(p[1][0], p[1][1])])
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ResidueConfig {
    pub zeta1: [f64; 2],
    pub min_offset: f64,
    pub max_offset: f64,
}

impl Default for ResidueConfig {
    fn default() -> Self {
        Self {
            zeta1: [0.0, 0.0],
            min_offset: 0.05,
            max_offset: 0.15,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub tuples: Vec<PointTuple>,
    /// Minimal distance of every point to the boundary of the domain.
    pub min_boundary_distance: f64,
    pub solver: SolverSettings,
    pub mesh: MeshConfig,
    pub residue: ResidueConfig,
    pub seed: u64,
    pub threads: usize,
}

fn pair(a: (f64, f64), b: (f64, f64)) -> [[f64; 2]; 2] {
    [[a.0, a.1], [b.0, b.1]]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            family: Family::ReducedAztec,
            sizes: vec![4, 8, 16],
            tuples: vec![
                PointTuple {
                    name: "two-vertical".into(),
                    pairs: vec![pair((-0.5, -0.3), (-0.5, 0.3)), pair((0.1, -0.3), (0.1, 0.3))],
                },
                PointTuple {
                    name: "two-horizontal".into(),
                    pairs: vec![pair((-0.6, 0.0), (-0.2, 0.0)), pair((0.2, 0.0), (0.6, 0.0))],
                },
                // no symmetry of the square maps this triple to itself, so
                // its alternating sum does not vanish identically
                PointTuple {
                    name: "three-generic".into(),
                    pairs: vec![
                        pair((-0.55, 0.05), (-0.2, 0.25)),
                        pair((-0.1, -0.4), (0.2, -0.1)),
                        pair((0.15, 0.3), (0.55, 0.1)),
                    ],
                },
            ],
            min_boundary_distance: 0.3,
            solver: SolverSettings::default(),
            mesh: MeshConfig::default(),
            residue: ResidueConfig::default(),
            seed: 0,
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    /// Limit profile of the configured family.
    pub fn xi(&self) -> XiFunction {
        XiFunction::aztec()
    }

    /// Points must be pairwise distinct and at least
    /// `min_boundary_distance` away from the boundary.
    pub fn validate(&self) -> Result<(), String> {
        if self.family == Family::Prism {
            return Err("the convergence experiment needs an Aztec family".into());
        }
        let xi = self.xi();
        for t in &self.tuples {
            let pts: Vec<C64> = t.points().into_iter().flatten().collect();
            for (i, a) in pts.iter().enumerate() {
                if pts[i + 1..].iter().any(|b| (a - b).norm() < 1e-9) {
                    return Err(format!("tuple {}: repeated point {a}", t.name));
                }
                if !xi.contains(*a) {
                    return Err(format!("tuple {}: point {a} outside the domain", t.name));
                }
                let d = xi.distance_to_boundary(*a);
                if d < self.min_boundary_distance {
                    return Err(format!(
                        "tuple {}: point {a} at distance {d:.3} from the boundary",
                        t.name
                    ));
                }
            }
        }
        Ok(())
    }
}

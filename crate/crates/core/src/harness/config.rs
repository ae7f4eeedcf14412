//! JSON instance configuration.
//!
//! Complex entries are `[re, im]` pairs and tensor matrices are nested
//! row-major arrays. Each explicit tensor lists its `edge_order` (neighbor ids
//! in virtual-digit order) so the column layout is pinned in the file.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{check_capacity, generate_random_injective};
use crate::error::{Error, Result};
use crate::linalg::{self, ZERO_TOL};
use crate::network::{InteractionGraph, Peps, PepsTensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Chain { n: usize },
    Ring { n: usize },
    Grid { rows: usize, cols: usize },
    Custom { n: usize, edges: Vec<[usize; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorEntry {
    pub vertex: usize,
    pub edge_order: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TensorSource {
    Explicit {
        tensors: Vec<TensorEntry>,
    },
    /// Singular values drawn from `[1 / kappa_max, 1]`.
    RandomInjective {
        kappa_max: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_zero_tol")]
    pub zero_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { zero_tol: ZERO_TOL }
    }
}

fn default_zero_tol() -> f64 {
    ZERO_TOL
}

fn default_eps() -> f64 {
    0.1
}

fn default_c() -> f64 {
    1.0
}

/// Oracle values pinned alongside a fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedValues {
    /// Condition number per vertex id.
    pub kappa: Vec<f64>,
    /// `p_t` per step.
    pub overlap: Vec<f64>,
    /// Spectral gap of `H_0 ..= H_n`.
    pub gap: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub graph: GraphSpec,
    pub bond_dim: usize,
    /// Defaults to the register dimension of each vertex.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical_dims: Option<Vec<usize>>,
    pub tensors: TensorSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<ExpectedValues>,
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        "/".into()
    } else {
        out
    }
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

impl InstanceConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = json_pointer(e.path());
            schema(pointer, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(schema("/eps", format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if !(self.c > 0.0) {
            return Err(schema("/c", format!("penalty weight must be positive, got {}", self.c)));
        }
        if !(self.tolerances.zero_tol > 0.0) {
            return Err(schema("/tolerances/zero_tol", "must be positive"));
        }
        if let TensorSource::RandomInjective { kappa_max, .. } = self.tensors {
            if !(kappa_max >= 1.0) || !kappa_max.is_finite() {
                return Err(schema(
                    "/tensors/kappa_max",
                    format!("must be a finite value >= 1, got {kappa_max}"),
                ));
            }
        }
        Ok(())
    }

    /// The interaction graph, checked against the dimension cap.
    pub fn build_graph(&self) -> Result<InteractionGraph> {
        let d = self.bond_dim;
        let base = match &self.graph {
            GraphSpec::Chain { n } => InteractionGraph::chain(*n, d),
            GraphSpec::Ring { n } => InteractionGraph::ring(*n, d),
            GraphSpec::Grid { rows, cols } => InteractionGraph::grid(*rows, *cols, d),
            GraphSpec::Custom { n, edges } => {
                let edges: Vec<_> = edges.iter().map(|&[u, v]| (u, v, d)).collect();
                InteractionGraph::new(*n, &edges, None, None)
            }
        }
        .map_err(|e| schema("/graph", e.to_string()))?;
        let edges: Vec<_> = base.edges().iter().map(|e| (e.a, e.b, e.bond_dim)).collect();
        let n = base.vertex_count();
        if self.physical_dims.is_some() {
            InteractionGraph::new(n, &edges, self.physical_dims.clone(), None)
                .map_err(|e| schema("/physical_dims", e.to_string()))?;
        }
        let graph = InteractionGraph::new(n, &edges, self.physical_dims.clone(), self.order.clone())
            .map_err(|e| schema("/order", e.to_string()))?;
        check_capacity("register space", &graph.register_dims())?;
        check_capacity("physical space", graph.physical_dims())?;
        Ok(graph)
    }

    pub fn build_peps(&self) -> Result<Peps> {
        let graph = self.build_graph()?;
        let tensors = match &self.tensors {
            TensorSource::RandomInjective { kappa_max, seed } => {
                let mut rng = ChaCha20Rng::seed_from_u64(*seed);
                (0..graph.vertex_count())
                    .map(|v| {
                        generate_random_injective(
                            v,
                            graph.physical_dims()[v],
                            graph.register_dim(v),
                            *kappa_max,
                            &mut rng,
                        )
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            TensorSource::Explicit { tensors } => {
                if tensors.len() != graph.vertex_count() {
                    return Err(schema(
                        "/tensors/tensors",
                        format!("{} tensors for {} vertices", tensors.len(), graph.vertex_count()),
                    ));
                }
                let mut slots: Vec<Option<PepsTensor>> = vec![None; graph.vertex_count()];
                for (i, entry) in tensors.iter().enumerate() {
                    let at = |field: &str| format!("/tensors/tensors/{i}/{field}");
                    let v = entry.vertex;
                    if v >= graph.vertex_count() || slots[v].is_some() {
                        return Err(schema(at("vertex"), format!("vertex {v} is unknown or repeated")));
                    }
                    let neighbors: Vec<usize> = graph.incident(v).iter().map(|&(_, nb)| nb).collect();
                    if entry.edge_order != neighbors {
                        return Err(schema(
                            at("edge_order"),
                            format!(
                                "expected neighbors in ascending order {neighbors:?}, got {:?}",
                                entry.edge_order
                            ),
                        ));
                    }
                    let matrix = linalg::from_nested(&entry.matrix).map_err(|e| schema(at("matrix"), e.to_string()))?;
                    let want = (graph.physical_dims()[v], graph.register_dim(v));
                    if matrix.shape() != want {
                        return Err(schema(
                            at("matrix"),
                            format!("shape {:?}, expected {want:?}", matrix.shape()),
                        ));
                    }
                    let tensor =
                        PepsTensor::canonicalize(v, matrix).map_err(|e| schema(at("matrix"), e.to_string()))?;
                    slots[v] = Some(tensor);
                }
                slots.into_iter().map(|t| t.expect("every vertex filled")).collect()
            }
        };
        Peps::new(graph, tensors)
    }

    /// Same instance with random tensors written out explicitly.
    pub fn materialize(&self) -> Result<Self> {
        let peps = self.build_peps()?;
        let tensors = peps
            .tensors()
            .iter()
            .map(|t| TensorEntry {
                vertex: t.vertex,
                edge_order: peps.graph().incident(t.vertex).iter().map(|&(_, nb)| nb).collect(),
                matrix: linalg::to_nested(&t.matrix),
            })
            .collect();
        Ok(Self {
            tensors: TensorSource::Explicit { tensors },
            ..self.clone()
        })
    }

    /// A copy whose random tensor seed is shifted by `offset`.
    pub fn with_tensor_seed_offset(&self, offset: u64) -> Option<Self> {
        match self.tensors {
            TensorSource::RandomInjective { kappa_max, seed } => Some(Self {
                tensors: TensorSource::RandomInjective {
                    kappa_max,
                    seed: seed.wrapping_add(offset),
                },
                ..self.clone()
            }),
            TensorSource::Explicit { .. } => None,
        }
    }
}

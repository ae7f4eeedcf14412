//! PEPS data model and the brute-force contraction oracle.
//!
//! Vertex registers carry the virtual space of their incident bonds. The
//! virtual index of a vertex is mixed-radix over its incident edges ordered by
//! ascending neighbor id (first neighbor most significant), and the global
//! index is mixed-radix over vertices with vertex 0 most significant.

use crate::error::{Error, Result};
use crate::linalg::{self, c64, ComplexMatrix, ComplexVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    /// Smaller endpoint.
    pub a: usize,
    /// Larger endpoint.
    pub b: usize,
    pub bond_dim: usize,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }

    pub fn touches(&self, v: usize) -> bool {
        self.a == v || self.b == v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    vertex_count: usize,
    order: Vec<usize>,
    edges: Vec<Edge>,
    physical_dims: Vec<usize>,
    /// `incident[v]` = (edge index, neighbor) sorted by neighbor id.
    incident: Vec<Vec<(usize, usize)>>,
}

impl InteractionGraph {
    /// Builds and validates a graph. `physical_dims` defaults to the register
    /// dimension of each vertex when `None`; `order` defaults to `0..n`.
    pub fn new(
        vertex_count: usize,
        edges: &[(usize, usize, usize)],
        physical_dims: Option<Vec<usize>>,
        order: Option<Vec<usize>>,
    ) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidInput("graph has no vertices".into()));
        }
        let mut list = Vec::with_capacity(edges.len());
        for &(u, v, bond_dim) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidInput(format!("edge ({u}, {v}) has an unknown endpoint")));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at vertex {u}")));
            }
            if bond_dim < 2 {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) has bond dimension {bond_dim} < 2"
                )));
            }
            let edge = Edge {
                a: u.min(v),
                b: u.max(v),
                bond_dim,
            };
            if list.iter().any(|e: &Edge| e.a == edge.a && e.b == edge.b) {
                return Err(Error::InvalidInput(format!("duplicate edge ({u}, {v})")));
            }
            list.push(edge);
        }
        let mut incident = vec![Vec::new(); vertex_count];
        for (i, e) in list.iter().enumerate() {
            incident[e.a].push((i, e.b));
            incident[e.b].push((i, e.a));
        }
        for inc in &mut incident {
            inc.sort_by_key(|&(_, nb)| nb);
        }
        if let Some(v) = incident.iter().position(Vec::is_empty) {
            if vertex_count > 1 {
                return Err(Error::InvalidInput(format!("vertex {v} has no incident edge")));
            }
        }
        let register_dims: Vec<usize> = incident
            .iter()
            .map(|inc| inc.iter().map(|&(e, _)| list[e].bond_dim).product())
            .collect();
        let physical_dims = physical_dims.unwrap_or_else(|| register_dims.clone());
        if physical_dims.len() != vertex_count {
            return Err(Error::InvalidInput(format!(
                "{} physical dimensions for {vertex_count} vertices",
                physical_dims.len()
            )));
        }
        for (v, (&d, &r)) in physical_dims.iter().zip(&register_dims).enumerate() {
            if d < r {
                return Err(Error::InvalidInput(format!(
                    "vertex {v}: physical dimension {d} is below the virtual dimension {r}; no injective map exists"
                )));
            }
        }
        let order = order.unwrap_or_else(|| (0..vertex_count).collect());
        let mut seen = vec![false; vertex_count];
        if order.len() != vertex_count
            || order
                .iter()
                .any(|&v| v >= vertex_count || std::mem::replace(&mut seen[v], true))
        {
            return Err(Error::InvalidInput("vertex order is not a permutation".into()));
        }
        Ok(Self {
            vertex_count,
            order,
            edges: list,
            physical_dims,
            incident,
        })
    }

    pub fn chain(n: usize, bond_dim: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i, bond_dim)).collect();
        Self::new(n, &edges, None, None)
    }

    pub fn ring(n: usize, bond_dim: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput("a ring needs at least 3 vertices".into()));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, bond_dim)).collect();
        Self::new(n, &edges, None, None)
    }

    /// Row-major `rows x cols` grid with nearest-neighbor edges.
    pub fn grid(rows: usize, cols: usize, bond_dim: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1, bond_dim));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols, bond_dim));
                }
            }
        }
        Self::new(rows * cols, &edges, None, None)
    }

    pub fn with_order(mut self, order: Vec<usize>) -> Result<Self> {
        let edges: Vec<_> = self.edges.iter().map(|e| (e.a, e.b, e.bond_dim)).collect();
        let fresh = Self::new(self.vertex_count, &edges, Some(self.physical_dims.clone()), Some(order))?;
        self.order = fresh.order;
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn physical_dims(&self) -> &[usize] {
        &self.physical_dims
    }

    /// `(edge index, neighbor)` pairs in virtual-index order.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.incident[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident[v].len()
    }

    pub fn degree_bound(&self) -> usize {
        (0..self.vertex_count).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn register_dim(&self, v: usize) -> usize {
        self.virtual_dims(v).iter().product()
    }

    pub fn register_dims(&self) -> Vec<usize> {
        (0..self.vertex_count).map(|v| self.register_dim(v)).collect()
    }

    /// Bond dimensions of the virtual digits of `v`, most significant first.
    pub fn virtual_dims(&self, v: usize) -> Vec<usize> {
        self.incident[v].iter().map(|&(e, _)| self.edges[e].bond_dim).collect()
    }

    /// Position of edge `edge` among the virtual digits of `v`.
    pub fn digit_position(&self, v: usize, edge: usize) -> Option<usize> {
        self.incident[v].iter().position(|&(e, _)| e == edge)
    }

    pub fn global_register_dim(&self) -> usize {
        self.register_dims().iter().product()
    }

    pub fn global_physical_dim(&self) -> usize {
        self.physical_dims.iter().product()
    }

    /// Vertices processed after `t` steps of the total order.
    pub fn processed_mask(&self, t: usize) -> Vec<bool> {
        let mut mask = vec![false; self.vertex_count];
        for &v in &self.order[..t.min(self.vertex_count)] {
            mask[v] = true;
        }
        mask
    }
}

/// A vertex tensor `A` (`d x r`) together with its polar gauge `A = U P`.
#[derive(Debug, Clone)]
pub struct PepsTensor {
    pub vertex: usize,
    pub matrix: ComplexMatrix,
    pub isometry: ComplexMatrix,
    pub positive: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub kappa: f64,
}

impl PepsTensor {
    /// Computes the polar factors; fails if `matrix` is not injective.
    pub fn canonicalize(vertex: usize, matrix: ComplexMatrix) -> Result<Self> {
        let polar = linalg::polar_decompose(&matrix)?;
        let kappa = polar.singular_values[0] / polar.singular_values[polar.singular_values.len() - 1];
        Ok(Self {
            vertex,
            matrix,
            isometry: polar.isometry,
            positive: polar.psd,
            singular_values: polar.singular_values,
            kappa,
        })
    }

    pub fn sigma_min(&self) -> f64 {
        *self.singular_values.last().expect("non-empty")
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values[0]
    }

    pub fn physical_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn virtual_dim(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Unit-norm amplitudes over a product of registers.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amplitudes: ComplexVector,
}

impl StateVector {
    /// Normalizes `amplitudes`; fails on a zero vector.
    pub fn new(dims: Vec<usize>, amplitudes: ComplexVector) -> Result<Self> {
        let (state, _) = Self::normalized(dims, amplitudes)?;
        Ok(state)
    }

    /// Normalizes and also returns the squared norm of the input.
    pub fn normalized(dims: Vec<usize>, amplitudes: ComplexVector) -> Result<(Self, f64)> {
        if dims.iter().product::<usize>() != amplitudes.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for registers {dims:?}",
                amplitudes.len()
            )));
        }
        let norm_sq = amplitudes.norm_squared();
        if !(norm_sq > 0.0) || !norm_sq.is_finite() {
            return Err(Error::Numerical("cannot normalize a zero or non-finite state".into()));
        }
        let amplitudes = amplitudes.unscale(norm_sq.sqrt());
        Ok((Self { dims, amplitudes }, norm_sq))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Applies `op` to one register without renormalizing.
    pub fn apply_local(&self, site: usize, op: &ComplexMatrix) -> Result<(Vec<usize>, ComplexVector)> {
        let (amps, dims) = linalg::apply_on_register(&self.amplitudes, &self.dims, site, op)?;
        Ok((dims, amps))
    }
}

/// An injective PEPS: graph plus one canonicalized tensor per vertex.
#[derive(Debug, Clone)]
pub struct Peps {
    graph: InteractionGraph,
    tensors: Vec<PepsTensor>,
}

impl Peps {
    /// `tensors[v]` must be `d_v x r_v`.
    pub fn new(graph: InteractionGraph, tensors: Vec<PepsTensor>) -> Result<Self> {
        if tensors.len() != graph.vertex_count() {
            return Err(Error::InvalidInput(format!(
                "{} tensors for {} vertices",
                tensors.len(),
                graph.vertex_count()
            )));
        }
        for (v, t) in tensors.iter().enumerate() {
            let want = (graph.physical_dims()[v], graph.register_dim(v));
            if t.vertex != v || t.matrix.shape() != want {
                return Err(Error::DimensionMismatch(format!(
                    "tensor for vertex {v} is {}x{}, expected {}x{}",
                    t.matrix.nrows(),
                    t.matrix.ncols(),
                    want.0,
                    want.1
                )));
            }
        }
        Ok(Self { graph, tensors })
    }

    /// Canonicalizes raw `d_v x r_v` matrices.
    pub fn from_matrices(graph: InteractionGraph, matrices: Vec<ComplexMatrix>) -> Result<Self> {
        let tensors = matrices
            .into_iter()
            .enumerate()
            .map(|(v, m)| PepsTensor::canonicalize(v, m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(graph, tensors)
    }

    pub fn graph(&self) -> &InteractionGraph {
        &self.graph
    }

    pub fn tensors(&self) -> &[PepsTensor] {
        &self.tensors
    }

    pub fn tensor(&self, v: usize) -> &PepsTensor {
        &self.tensors[v]
    }

    /// Largest condition number over all vertices.
    pub fn kappa(&self) -> f64 {
        self.tensors.iter().map(|t| t.kappa).fold(1.0, f64::max)
    }

    /// The vertex processed at step `t` (0-based).
    pub fn vertex_at(&self, t: usize) -> usize {
        self.graph.order()[t]
    }

    pub fn pair_state(&self) -> StateVector {
        pair_state(&self.graph)
    }

    /// Normalized `(prod P^(v)) |pairs>` over the first `t` vertices, with
    /// `Z_t` the squared norm before normalization.
    pub fn contract_partial(&self, t: usize) -> Result<(StateVector, f64)> {
        self.contract_mask(&self.graph.processed_mask(t))
    }

    pub fn contract_mask(&self, processed: &[bool]) -> Result<(StateVector, f64)> {
        let mut state = self.pair_state();
        let mut z = 1.0;
        for (v, _) in processed.iter().enumerate().filter(|(_, &p)| p) {
            let (dims, amps) = state.apply_local(v, &self.tensors[v].positive)?;
            let (next, norm_sq) = StateVector::normalized(dims, amps)
                .map_err(|_| Error::Numerical(format!("contraction vanished at vertex {v}")))?;
            z *= norm_sq;
            state = next;
        }
        Ok((state, z))
    }

    /// `Z_{t+1} / Z_t` against its lower bound `sigma_min(P_{t+1})^2`.
    pub fn z_ratio_bound(&self, t: usize) -> Result<ZRatio> {
        if t >= self.graph.vertex_count() {
            return Err(Error::InvalidInput(format!("no step after t = {t}")));
        }
        let (_, z_t) = self.contract_partial(t)?;
        let (_, z_next) = self.contract_partial(t + 1)?;
        let ratio = z_next / z_t;
        let lower_bound = self.tensors[self.vertex_at(t)].sigma_min().powi(2);
        if ratio < lower_bound - 1e-10 {
            return Err(Error::LemmaViolation(format!(
                "Z ratio {ratio} below sigma_min^2 = {lower_bound} at step {t}"
            )));
        }
        Ok(ZRatio { ratio, lower_bound })
    }

    /// Maps a fully processed canonical state onto the physical registers
    /// through each stored isometry `U^(v)`.
    pub fn restore_gauge(&self, state: &StateVector) -> Result<StateVector> {
        if state.dims() != self.graph.register_dims().as_slice() {
            return Err(Error::DimensionMismatch("state is not on the register space".into()));
        }
        let mut dims = state.dims().to_vec();
        let mut amps = state.amplitudes().clone();
        for (v, tensor) in self.tensors.iter().enumerate() {
            let (next, next_dims) = linalg::apply_on_register(&amps, &dims, v, &tensor.isometry)?;
            amps = next;
            dims = next_dims;
        }
        let weight = (1.0 - amps.norm_squared()).abs();
        if weight > 1e-8 {
            return Err(Error::GaugeRestore { weight });
        }
        StateVector::new(dims, amps)
    }

    /// The target PEPS contracted directly from the original tensors.
    pub fn contract_original(&self) -> Result<StateVector> {
        let mut state = self.pair_state();
        for (v, tensor) in self.tensors.iter().enumerate() {
            let (dims, amps) = state.apply_local(v, &tensor.matrix)?;
            state = StateVector::new(dims, amps)?;
        }
        Ok(state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZRatio {
    pub ratio: f64,
    pub lower_bound: f64,
}

/// Tensor product of normalized maximally entangled pairs over all edges.
pub fn pair_state(graph: &InteractionGraph) -> StateVector {
    let dims = graph.register_dims();
    let total: usize = dims.iter().product();
    let edges = graph.edges();
    let bond_dims: Vec<usize> = edges.iter().map(|e| e.bond_dim).collect();
    let labelings: usize = bond_dims.iter().product();
    let amplitude = c64(1.0 / (labelings as f64).sqrt(), 0.0);
    let mut amps = ComplexVector::zeros(total);
    let mut labels = vec![0; edges.len()];
    let mut register = Vec::new();
    let mut vertex_digits = vec![0; graph.vertex_count()];
    for index in 0..labelings {
        linalg::digits(index, &bond_dims, &mut labels);
        for (v, slot) in vertex_digits.iter_mut().enumerate() {
            register.clear();
            register.extend(graph.incident(v).iter().map(|&(e, _)| labels[e]));
            *slot = linalg::compose(&register, &graph.virtual_dims(v));
        }
        amps[linalg::compose(&vertex_digits, &dims)] = amplitude;
    }
    StateVector { dims, amplitudes: amps }
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;
    use crate::harness::generate_random_injective;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_peps(graph: InteractionGraph, kappa_max: f64, seed: u64) -> Peps {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tensors = (0..graph.vertex_count())
            .map(|v| {
                generate_random_injective(v, graph.physical_dims()[v], graph.register_dim(v), kappa_max, &mut rng)
                    .unwrap()
            })
            .collect();
        Peps::new(graph, tensors).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::tests_support::random_peps;
    use super::*;
    use crate::harness::generate_random_injective;
    use crate::linalg::{diag, identity, max_abs_diff};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn identity_peps(graph: InteractionGraph) -> Peps {
        let mats = (0..graph.vertex_count())
            .map(|v| identity(graph.register_dim(v)))
            .collect();
        Peps::from_matrices(graph, mats).unwrap()
    }

    #[test]
    fn graph_validation() {
        assert!(InteractionGraph::new(2, &[(0, 0, 2)], None, None).is_err());
        assert!(InteractionGraph::new(2, &[(0, 1, 2), (1, 0, 2)], None, None).is_err());
        assert!(InteractionGraph::new(2, &[(0, 1, 2)], Some(vec![1, 2]), None).is_err());
        assert!(InteractionGraph::new(2, &[(0, 1, 2)], None, Some(vec![0, 0])).is_err());
        assert!(InteractionGraph::ring(2, 2).is_err());
        let g = InteractionGraph::grid(2, 2, 2).unwrap();
        assert_eq!(g.edges().len(), 4);
        assert_eq!(g.register_dims(), vec![4, 4, 4, 4]);
        assert_eq!(g.degree_bound(), 2);
        let g = InteractionGraph::chain(3, 3).unwrap();
        assert_eq!(g.register_dims(), vec![3, 9, 3]);
        assert_eq!(g.incident(1), &[(0, 0), (1, 2)]);
    }

    #[test]
    fn canonicalize_cases() {
        let t = PepsTensor::canonicalize(0, identity(2)).unwrap();
        assert!(max_abs_diff(&t.positive, &identity(2)) < 1e-14);
        assert!(max_abs_diff(&t.isometry, &identity(2)) < 1e-14);
        let t = PepsTensor::canonicalize(0, diag(&[3.0, 1.0])).unwrap();
        assert!(max_abs_diff(&t.positive, &diag(&[3.0, 1.0])) < 1e-14);
        assert!(max_abs_diff(&t.isometry, &identity(2)) < 1e-14);
        assert!((t.kappa - 3.0).abs() < 1e-12);
        assert!(matches!(
            PepsTensor::canonicalize(0, diag(&[1.0, 0.0])),
            Err(Error::Injectivity { .. })
        ));
    }

    #[test]
    fn pair_state_single_edge() {
        let g = InteractionGraph::chain(2, 2).unwrap();
        let s = pair_state(&g);
        let h = 0.5f64.sqrt();
        let expected = [h, 0.0, 0.0, h];
        for (a, b) in s.amplitudes().iter().zip(expected) {
            assert!((a - c64(b, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn pair_state_two_disjoint_edges() {
        let g = InteractionGraph::new(4, &[(0, 1, 2), (2, 3, 2)], None, None).unwrap();
        let s = pair_state(&g);
        assert!((s.norm() - 1.0).abs() < 1e-14);
        let single = pair_state(&InteractionGraph::chain(2, 2).unwrap());
        let product = single.amplitudes().kronecker(single.amplitudes());
        assert!((s.amplitudes() - product).norm() < 1e-15);
    }

    #[test]
    fn pair_state_chain_three_layout() {
        // Vertex 1's register digits are (edge to 0, edge to 2).
        let g = InteractionGraph::chain(3, 2).unwrap();
        let s = pair_state(&g);
        let nonzero: Vec<usize> = (0..s.dim()).filter(|&i| s.amplitudes()[i].norm() > 0.0).collect();
        // |a, (a b), b> with index a*8 + (2a + b)*2 + b
        assert_eq!(nonzero, vec![0, 3, 12, 15]);
    }

    #[test]
    fn contract_partial_trivial_cases() {
        let peps = random_peps(InteractionGraph::chain(3, 2).unwrap(), 3.0, 1);
        let (s, z) = peps.contract_partial(0).unwrap();
        assert_eq!(s, peps.pair_state());
        assert_eq!(z, 1.0);

        let id = identity_peps(InteractionGraph::ring(4, 2).unwrap());
        for t in 0..=4 {
            let (s, z) = id.contract_partial(t).unwrap();
            assert!((s.fidelity(&id.pair_state()) - 1.0).abs() < 1e-12);
            assert!((z - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn z_ratio_cases() {
        let id = identity_peps(InteractionGraph::chain(2, 2).unwrap());
        let r = id.z_ratio_bound(0).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-14 && (r.lower_bound - 1.0).abs() < 1e-14);

        let g = InteractionGraph::chain(2, 2).unwrap();
        let scaled = Peps::from_matrices(g, vec![identity(2).scale(1.7), identity(2)]).unwrap();
        let r = scaled.z_ratio_bound(0).unwrap();
        assert!((r.ratio - 1.7 * 1.7).abs() < 1e-12);
        assert!((r.lower_bound - 1.7 * 1.7).abs() < 1e-12);
    }

    #[test]
    fn z_ratio_random_chain() {
        for seed in 0..10 {
            let peps = random_peps(InteractionGraph::chain(3, 2).unwrap(), 4.0, seed);
            for t in 0..3 {
                let r = peps.z_ratio_bound(t).unwrap();
                assert!(r.ratio >= r.lower_bound - 1e-10);
            }
        }
    }

    #[test]
    fn restore_gauge_psd_tensors_is_identity() {
        let g = InteractionGraph::chain(2, 2).unwrap();
        let peps = Peps::from_matrices(g, vec![diag(&[2.0, 1.0]), diag(&[1.0, 3.0])]).unwrap();
        let (s, _) = peps.contract_partial(2).unwrap();
        let restored = peps.restore_gauge(&s).unwrap();
        assert!((restored.amplitudes() - s.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn restore_gauge_matches_original_contraction() {
        // Single vertex with a tall tensor: d = 3, r = 2.
        let g = InteractionGraph::new(2, &[(0, 1, 2)], Some(vec![3, 2]), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = generate_random_injective(0, 3, 2, 2.5, &mut rng).unwrap();
        let b = PepsTensor::canonicalize(1, identity(2)).unwrap();
        let peps = Peps::new(g, vec![a, b]).unwrap();
        let (s, _) = peps.contract_partial(2).unwrap();
        let restored = peps.restore_gauge(&s).unwrap();
        assert_eq!(restored.dims(), &[3, 2]);
        assert!(restored.fidelity(&peps.contract_original().unwrap()) >= 1.0 - 1e-12);

        for seed in 0..5 {
            let peps = random_peps(InteractionGraph::chain(3, 2).unwrap(), 5.0, seed);
            let (s, _) = peps.contract_partial(3).unwrap();
            let f = peps
                .restore_gauge(&s)
                .unwrap()
                .fidelity(&peps.contract_original().unwrap());
            assert!(f >= 1.0 - 1e-8, "fidelity {f}");
        }
    }

    #[test]
    fn restore_gauge_rejects_wrong_space() {
        let peps = random_peps(InteractionGraph::chain(2, 2).unwrap(), 2.0, 0);
        let other = pair_state(&InteractionGraph::chain(3, 2).unwrap());
        assert!(peps.restore_gauge(&other).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn gauge_restored_state_is_original_peps(seed in 0u64..100_000, ring in proptest::bool::ANY) {
                let graph = if ring {
                    InteractionGraph::ring(4, 2).unwrap()
                } else {
                    InteractionGraph::chain(4, 2).unwrap()
                };
                let peps = random_peps(graph, 5.0, seed);
                let (s, z) = peps.contract_partial(4).unwrap();
                prop_assert!(z > 0.0);
                let f = peps.restore_gauge(&s).unwrap().fidelity(&peps.contract_original().unwrap());
                prop_assert!(f >= 1.0 - 1e-8);
            }
        }
    }
}

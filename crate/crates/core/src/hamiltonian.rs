//! The Hamiltonian family `H_0, ..., H_n` grown one vertex at a time.
//!
//! Two-register terms act on the registers of an edge's endpoints, smaller id
//! first. `H_0` holds one pair term per edge; processing a vertex swaps every
//! term on its incident edges for an image-complement projector built from the
//! positive tensors of the processed endpoints (identity on unprocessed ones),
//! and adds a penalty on the vertex's non-physical subspace.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, ComplexMatrix, SpectralDecomposition};
use crate::network::{InteractionGraph, Peps, StateVector};

/// Gram matrices worse than this are rejected when orthonormalizing an image basis.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    EdgePair,
    Parent,
    Boundary,
    Penalty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalTerm {
    /// Register ids; local index is mixed-radix over them, first most significant.
    pub support: Vec<usize>,
    pub matrix: ComplexMatrix,
    pub kind: TermKind,
}

impl LocalTerm {
    pub fn touches(&self, v: usize) -> bool {
        self.support.contains(&v)
    }
}

/// `1 - |omega><omega|` on `C^D (x) C^D`, `omega = sum_i |ii> / sqrt(D)`.
pub fn edge_term(bond_dim: usize) -> ComplexMatrix {
    let n = bond_dim * bond_dim;
    let w = 1.0 / bond_dim as f64;
    ComplexMatrix::from_fn(n, n, |r, c| {
        let diag = if r == c { 1.0 } else { 0.0 };
        let pair = if r % (bond_dim + 1) == 0 && c % (bond_dim + 1) == 0 {
            w
        } else {
            0.0
        };
        c64(diag - pair, 0.0)
    })
}

/// The pair term of `edge` acting on the full registers of both endpoints:
/// `edge_term` on the edge's two digits, identity on every other digit.
pub fn edge_pair_term(graph: &InteractionGraph, edge: usize) -> LocalTerm {
    let e = graph.edges()[edge];
    let (da, db) = (graph.virtual_dims(e.a), graph.virtual_dims(e.b));
    let (pa, pb) = (
        graph.digit_position(e.a, edge).expect("incident"),
        graph.digit_position(e.b, edge).expect("incident"),
    );
    let local_dims: Vec<usize> = da.iter().chain(&db).copied().collect();
    let (ia, ib) = (pa, da.len() + pb);
    let embedded = linalg::embed_term(&edge_term(e.bond_dim), &[ia, ib], &local_dims).expect("consistent dims");
    LocalTerm {
        support: vec![e.a, e.b],
        matrix: embedded,
        kind: TermKind::EdgePair,
    }
}

/// Inserts digit `k` at position `pos` into the mixed-radix number `rest`
/// over `dims` with `pos` removed.
fn insert_digit(rest: usize, dims: &[usize], pos: usize, k: usize) -> usize {
    let reduced: Vec<usize> = dims
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != pos)
        .map(|(_, &d)| d)
        .collect();
    let mut digits = vec![0; reduced.len()];
    linalg::digits(rest, &reduced, &mut digits);
    digits.insert(pos, k);
    linalg::compose(&digits, dims)
}

/// Parent term on `edge` given which vertices are already processed.
///
/// With `M_x = P^(x)` on processed endpoints and identity otherwise, the kernel
/// is the image of `omega_e (x) (other digits)` under `M_a (x) M_b`; the term
/// projects onto its orthogonal complement.
pub fn parent_term(peps: &Peps, edge: usize, processed: &[bool]) -> Result<LocalTerm> {
    let graph = peps.graph();
    let e = *graph
        .edges()
        .get(edge)
        .ok_or_else(|| Error::InvalidInput(format!("no edge {edge}")))?;
    let (ra, rb) = (graph.register_dim(e.a), graph.register_dim(e.b));
    let (da, db) = (graph.virtual_dims(e.a), graph.virtual_dims(e.b));
    let pa = graph.digit_position(e.a, edge).expect("incident");
    let pb = graph.digit_position(e.b, edge).expect("incident");
    let d = e.bond_dim;
    let (rest_a, rest_b) = (ra / d, rb / d);

    let amp = c64(1.0 / (d as f64).sqrt(), 0.0);
    let mut basis = ComplexMatrix::zeros(ra * rb, rest_a * rest_b);
    for xa in 0..rest_a {
        for xb in 0..rest_b {
            let col = xa * rest_b + xb;
            for k in 0..d {
                let ia = insert_digit(xa, &da, pa, k);
                let ib = insert_digit(xb, &db, pb, k);
                basis[(ia * rb + ib, col)] = amp;
            }
        }
    }

    let map_for = |v: usize| -> ComplexMatrix {
        if processed[v] {
            peps.tensor(v).positive.clone()
        } else {
            linalg::identity(graph.register_dim(v))
        }
    };
    let kind = match (processed[e.a], processed[e.b]) {
        (true, true) => TermKind::Parent,
        (false, false) => TermKind::EdgePair,
        _ => TermKind::Boundary,
    };
    let image = if kind == TermKind::EdgePair {
        basis
    } else {
        linalg::kron(&map_for(e.a), &map_for(e.b)) * basis
    };

    let gram = image.adjoint() * &image;
    let spectrum = linalg::hermitian_eig(&gram)?;
    let (lo, hi) = (
        spectrum.eigenvalues[0],
        *spectrum.eigenvalues.last().expect("non-empty"),
    );
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition > GRAM_CONDITION_LIMIT {
        return Err(Error::Conditioning {
            u: e.a,
            v: e.b,
            condition,
        });
    }
    // image * V * Lambda^{-1/2} is an orthonormal basis of the image.
    let mut whiten = spectrum.eigenvectors.clone();
    for (c, &l) in spectrum.eigenvalues.iter().enumerate() {
        whiten.column_mut(c).unscale_mut(l.sqrt());
    }
    let orthonormal = &image * whiten;
    let projector = &orthonormal * orthonormal.adjoint();
    let mut matrix = linalg::identity(ra * rb) - projector;
    matrix = (&matrix + matrix.adjoint()).scale(0.5);
    Ok(LocalTerm {
        support: vec![e.a, e.b],
        matrix,
        kind,
    })
}

/// `c (1 - P_phy)` on register `v`.
pub fn penalty_term(v: usize, physical_projector: &ComplexMatrix, c: f64) -> Result<LocalTerm> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidInput(format!("penalty weight must be positive, got {c}")));
    }
    let p = physical_projector;
    if !p.is_square() || linalg::max_abs_diff(&(p * p), p) > 1e-9 || linalg::hermiticity_defect(p) > 1e-9 {
        return Err(Error::InvalidInput(
            "physical subspace is not given by an orthogonal projector".into(),
        ));
    }
    let matrix = (linalg::identity(p.nrows()) - p).scale(c);
    Ok(LocalTerm {
        support: vec![v],
        matrix,
        kind: TermKind::Penalty,
    })
}

/// Physical-subspace projector of register `v`. In the positive gauge the
/// applied map is full rank on the register, so the subspace is all of it.
pub fn physical_projector(graph: &InteractionGraph, v: usize) -> ComplexMatrix {
    linalg::identity(graph.register_dim(v))
}

fn term_order(a: &LocalTerm, b: &LocalTerm) -> std::cmp::Ordering {
    (a.support.len() == 1, &a.support, a.kind).cmp(&(b.support.len() == 1, &b.support, b.kind))
}

/// `H_t`: its terms plus lazily computed global matrix and spectrum.
#[derive(Debug)]
pub struct LocalHamiltonian {
    step: usize,
    terms: Vec<LocalTerm>,
    register_dims: Vec<usize>,
    global: OnceLock<ComplexMatrix>,
    spectrum: OnceLock<SpectralDecomposition>,
}

impl Clone for LocalHamiltonian {
    fn clone(&self) -> Self {
        Self::from_terms(self.step, self.terms.clone(), self.register_dims.clone())
    }
}

impl LocalHamiltonian {
    fn from_terms(step: usize, mut terms: Vec<LocalTerm>, register_dims: Vec<usize>) -> Self {
        terms.sort_by(term_order);
        Self {
            step,
            terms,
            register_dims,
            global: OnceLock::new(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn register_dims(&self) -> &[usize] {
        &self.register_dims
    }

    pub fn global_matrix(&self) -> &ComplexMatrix {
        self.global.get_or_init(|| {
            let n: usize = self.register_dims.iter().product();
            let mut total = ComplexMatrix::zeros(n, n);
            for term in &self.terms {
                total += linalg::embed_term(&term.matrix, &term.support, &self.register_dims)
                    .expect("terms are built against these registers");
            }
            total
        })
    }

    pub fn spectrum(&self) -> Result<&SpectralDecomposition> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = linalg::hermitian_eig(self.global_matrix())?;
        Ok(self.spectrum.get_or_init(|| s))
    }

    /// `H_{t+1}` from `H_t`: drop every term on the next vertex, add its
    /// incident parent/boundary terms and its penalty.
    pub fn advance(&self, peps: &Peps, c: f64) -> Result<LocalHamiltonian> {
        let graph = peps.graph();
        if self.step >= graph.vertex_count() {
            return Err(Error::InvalidInput(format!("H_{} is already the last step", self.step)));
        }
        let v = peps.vertex_at(self.step);
        let processed = graph.processed_mask(self.step + 1);
        let mut terms: Vec<LocalTerm> = self.terms.iter().filter(|t| !t.touches(v)).cloned().collect();
        for &(edge, _) in graph.incident(v) {
            terms.push(parent_term(peps, edge, &processed)?);
        }
        terms.push(penalty_term(v, &physical_projector(graph, v), c)?);
        Ok(Self::from_terms(self.step + 1, terms, self.register_dims.clone()))
    }

    pub fn export(&self) -> HamiltonianExport {
        HamiltonianExport {
            step: self.step,
            register_dims: self.register_dims.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| TermExport {
                    kind: t.kind,
                    support: t.support.clone(),
                    matrix: linalg::to_nested(&t.matrix),
                })
                .collect(),
        }
    }
}

/// `H_0 = sum_e H_e`.
pub fn initial_hamiltonian(graph: &InteractionGraph) -> LocalHamiltonian {
    let terms = (0..graph.edges().len()).map(|e| edge_pair_term(graph, e)).collect();
    LocalHamiltonian::from_terms(0, terms, graph.register_dims())
}

/// `H_t` assembled from scratch.
pub fn assemble_step(peps: &Peps, t: usize, c: f64) -> Result<LocalHamiltonian> {
    let graph = peps.graph();
    if t > graph.vertex_count() {
        return Err(Error::InvalidInput(format!(
            "step {t} beyond {} vertices",
            graph.vertex_count()
        )));
    }
    if t == 0 {
        return Ok(initial_hamiltonian(graph));
    }
    let processed = graph.processed_mask(t);
    let mut terms = Vec::new();
    for e in 0..graph.edges().len() {
        terms.push(parent_term(peps, e, &processed)?);
    }
    for &v in &graph.order()[..t] {
        terms.push(penalty_term(v, &physical_projector(graph, v), c)?);
    }
    Ok(LocalHamiltonian::from_terms(t, terms, graph.register_dims()))
}

/// Every `H_0 ..= H_n`, built incrementally.
pub fn hamiltonian_sequence(peps: &Peps, c: f64) -> Result<Vec<LocalHamiltonian>> {
    let mut seq = vec![initial_hamiltonian(peps.graph())];
    for _ in 0..peps.graph().vertex_count() {
        let next = seq.last().expect("non-empty").advance(peps, c)?;
        seq.push(next);
    }
    Ok(seq)
}

/// Low-lying spectrum of `H_t` and its zero-energy projector.
#[derive(Debug, Clone)]
pub struct GroundAnalysis {
    pub step: usize,
    pub lambda0: f64,
    pub lambda1: f64,
    pub gap: f64,
    pub degeneracy: usize,
    pub ground_state: StateVector,
    pub projector: ComplexMatrix,
}

/// Exact diagonalization; fails unless the ground energy is zero and unique.
pub fn ground_analysis(h: &LocalHamiltonian, zero_tol: f64) -> Result<GroundAnalysis> {
    let spectrum = h.spectrum()?;
    let lambda0 = spectrum.eigenvalues[0];
    if lambda0.abs() > zero_tol {
        return Err(Error::NonZeroGroundEnergy {
            step: h.step,
            energy: lambda0,
        });
    }
    let degeneracy = spectrum.eigenvalues.iter().filter(|&&l| l < zero_tol).count();
    if degeneracy != 1 {
        return Err(Error::IntermediateInjectivity {
            step: h.step,
            degeneracy,
        });
    }
    let lambda1 = spectrum.eigenvalues.get(1).copied().unwrap_or(f64::INFINITY);
    let ground_state = StateVector::new(h.register_dims.clone(), spectrum.eigenvectors.column(0).into_owned())?;
    Ok(GroundAnalysis {
        step: h.step,
        lambda0,
        lambda1,
        gap: lambda1 - lambda0,
        degeneracy,
        ground_state,
        projector: spectrum.projector_below(zero_tol),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermExport {
    pub kind: TermKind,
    pub support: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

/// JSON form of `H_t` for external verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianExport {
    pub step: usize,
    pub register_dims: Vec<usize>,
    pub terms: Vec<TermExport>,
}

//! Measurement-driven preparation and its termination analysis.
//!
//! Energy measurements are exact binary projections onto the zero-energy
//! subspace of a Hamiltonian. A failed projection onto `H_{t+1}` is repaired by
//! alternately measuring `H_t` and `H_{t+1}`; the state never leaves the plane
//! spanned by the two ground states, so the process reduces to a four-state
//! Markov chain with closed-form termination probability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{self, GroundAnalysis};
use crate::linalg::{ComplexMatrix, C64};
use crate::network::{InteractionGraph, Peps, StateVector};

/// Distinct branch probabilities closer than this to 0 or 1 are snapped.
const BRANCH_SNAP: f64 = 1e-12;
/// Safety valve for the unbounded repair loop.
const UNBOUNDED_MEASUREMENT_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyLabel {
    Zero,
    Nonzero,
}

#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub label: EnergyLabel,
    /// Born probability of the branch that occurred.
    pub probability: f64,
    pub state: StateVector,
}

/// Random stream for the repair loop of step `t` under `seed`.
pub fn step_rng(seed: u64, t: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    rng
}

/// Projective zero-vs-nonzero energy measurement with projector `kernel`.
pub fn measure_zero_energy<R: Rng + ?Sized>(
    state: &StateVector,
    kernel: &ComplexMatrix,
    rng: &mut R,
) -> Result<MeasurementOutcome> {
    if kernel.shape() != (state.dim(), state.dim()) {
        return Err(Error::DimensionMismatch("projector does not match the state".into()));
    }
    let projected = kernel * state.amplitudes();
    let mut p_zero = projected.norm_squared();
    if p_zero < BRANCH_SNAP {
        p_zero = 0.0;
    } else if p_zero > 1.0 - BRANCH_SNAP {
        p_zero = 1.0;
    }
    let draw: f64 = rng.random();
    let (label, probability, amplitudes) = if draw < p_zero {
        (EnergyLabel::Zero, p_zero, projected)
    } else {
        (EnergyLabel::Nonzero, 1.0 - p_zero, state.amplitudes() - projected)
    };
    let state = StateVector::new(state.dims().to_vec(), amplitudes)?;
    Ok(MeasurementOutcome {
        label,
        probability,
        state,
    })
}

/// `|<psi_{t+1}|psi_t>|^2` from the contraction oracle.
pub fn overlap_p(peps: &Peps, t: usize) -> Result<f64> {
    if t >= peps.graph().vertex_count() {
        return Err(Error::InvalidInput(format!("no step after t = {t}")));
    }
    let (a, _) = peps.contract_partial(t)?;
    let (b, _) = peps.contract_partial(t + 1)?;
    Ok(b.fidelity(&a))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lemma1Step {
    pub step: usize,
    pub vertex: usize,
    pub overlap: f64,
    pub kappa: f64,
    /// `1 / kappa^2`.
    pub bound: f64,
    pub margin: f64,
    pub z_ratio: f64,
    /// `sigma_min^2`.
    pub z_bound: f64,
    pub z_margin: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub steps: Vec<Lemma1Step>,
    pub violations: usize,
}

impl Lemma1Report {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn min_margin(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.margin.min(s.z_margin))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Overlap and norm-ratio margins at every step, without failing on violations.
pub fn lemma1_report(peps: &Peps) -> Result<Lemma1Report> {
    let n = peps.graph().vertex_count();
    let mut contractions = Vec::with_capacity(n + 1);
    for t in 0..=n {
        contractions.push(peps.contract_partial(t)?);
    }
    let mut steps = Vec::with_capacity(n);
    let mut violations = 0;
    for t in 0..n {
        let vertex = peps.vertex_at(t);
        let tensor = peps.tensor(vertex);
        let ((a, z_t), (b, z_next)) = (&contractions[t], &contractions[t + 1]);
        let overlap = b.fidelity(a);
        let bound = 1.0 / (tensor.kappa * tensor.kappa);
        let z_ratio = z_next / z_t;
        let z_bound = tensor.sigma_min().powi(2);
        let step = Lemma1Step {
            step: t,
            vertex,
            overlap,
            kappa: tensor.kappa,
            bound,
            margin: overlap - bound,
            z_ratio,
            z_bound,
            z_margin: z_ratio - z_bound,
        };
        if step.margin < -1e-10 || step.z_margin < -1e-10 {
            violations += 1;
        }
        steps.push(step);
    }
    Ok(Lemma1Report { steps, violations })
}

/// Like [`lemma1_report`] but any violation is an error.
pub fn verify_lemma1(peps: &Peps) -> Result<Lemma1Report> {
    let report = lemma1_report(peps)?;
    if let Some(bad) = report.steps.iter().find(|s| s.margin < -1e-10 || s.z_margin < -1e-10) {
        return Err(Error::LemmaViolation(format!(
            "step {}: overlap {} vs 1/kappa^2 {}, Z ratio {} vs sigma_min^2 {}",
            bad.step, bad.overlap, bad.bound, bad.z_ratio, bad.z_bound
        )));
    }
    Ok(report)
}

/// The invariant plane of two consecutive ground states.
///
/// `psi_next` is rephased so that `<psi_next|psi_t> = -sqrt(p)`; with the
/// perpendicular vectors from Gram-Schmidt this makes all four relations
/// hold with real coefficients.
#[derive(Debug, Clone)]
pub struct JordanPlane {
    pub overlap: f64,
    /// Set when `p = 1`: the perpendicular vectors are undefined.
    pub trivial: bool,
    pub psi_t: StateVector,
    pub psi_t_perp: Option<StateVector>,
    pub psi_next: StateVector,
    pub psi_next_perp: Option<StateVector>,
}

impl JordanPlane {
    /// Largest residual of the four plane relations.
    pub fn relation_residual(&self) -> f64 {
        let (Some(tp), Some(np)) = (&self.psi_t_perp, &self.psi_next_perp) else {
            return 0.0;
        };
        let p = self.overlap;
        let (sp, sq) = (p.sqrt(), (1.0 - p).sqrt());
        let combo = |x: &StateVector, a: f64, y: &StateVector, b: f64| {
            x.amplitudes() * C64::new(a, 0.0) + y.amplitudes() * C64::new(b, 0.0)
        };
        let (t, n) = (&self.psi_t, &self.psi_next);
        [
            (t.amplitudes() - combo(n, -sp, np, sq)).norm(),
            (tp.amplitudes() - combo(n, sq, np, sp)).norm(),
            (n.amplitudes() - combo(t, -sp, tp, sq)).norm(),
            (np.amplitudes() - combo(t, sq, tp, sp)).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn jordan_plane(psi_t: &StateVector, psi_next: &StateVector) -> Result<JordanPlane> {
    let amplitude = psi_next.inner(psi_t);
    let overlap = amplitude.norm_sqr().min(1.0);
    if overlap < 1e-12 {
        return Err(Error::OrthogonalTargets { step: 0, overlap });
    }
    // Multiply psi_next by -phase so its overlap with psi_t is -sqrt(p).
    let phase = amplitude / amplitude.norm();
    let rephased = StateVector::new(psi_next.dims().to_vec(), psi_next.amplitudes() * (-phase))?;
    if 1.0 - overlap < 1e-12 {
        return Ok(JordanPlane {
            overlap: 1.0,
            trivial: true,
            psi_t: psi_t.clone(),
            psi_t_perp: None,
            psi_next: rephased,
            psi_next_perp: None,
        });
    }
    let sp = C64::new(overlap.sqrt(), 0.0);
    let dims = psi_t.dims().to_vec();
    // a + sqrt(p) b and b + sqrt(p) a, both with norm sqrt(1 - p).
    let next_perp = StateVector::new(dims.clone(), psi_t.amplitudes() + rephased.amplitudes() * sp)?;
    let t_perp = StateVector::new(dims, rephased.amplitudes() + psi_t.amplitudes() * sp)?;
    Ok(JordanPlane {
        overlap,
        trivial: false,
        psi_t: psi_t.clone(),
        psi_t_perp: Some(t_perp),
        psi_next: rephased,
        psi_next_perp: Some(next_perp),
    })
}

/// Jordan plane of step `t` built from the contraction oracle.
pub fn jordan_plane_at(peps: &Peps, t: usize) -> Result<JordanPlane> {
    let (a, _) = peps.contract_partial(t)?;
    let (b, _) = peps.contract_partial(t + 1)?;
    jordan_plane(&a, &b).map_err(|e| match e {
        Error::OrthogonalTargets { overlap, .. } => Error::OrthogonalTargets { step: t, overlap },
        other => other,
    })
}

fn check_overlap(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidInput(format!("overlap must lie in (0, 1], got {p}")));
    }
    Ok(())
}

/// `(1 - p) (p^2 + (1 - p)^2)^m`, with real `m` allowed.
pub fn failure_probability(p: f64, m: f64) -> f64 {
    let q = 1.0 - p;
    q * (p * p + q * q).powf(m)
}

/// Probability that the repair loop reaches `psi_{t+1}` within `2m + 1` measurements.
pub fn p_term(p: f64, m: u64) -> Result<f64> {
    check_overlap(p)?;
    Ok(1.0 - failure_probability(p, m as f64))
}

/// `(1 - p) exp(-2 m p (1 - p))`, checked against the exact failure probability.
pub fn p_fail_bound(p: f64, m: f64) -> Result<f64> {
    check_overlap(p)?;
    if !(m >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "alternation count must be non-negative, got {m}"
        )));
    }
    let bound = (1.0 - p) * (-2.0 * m * p * (1.0 - p)).exp();
    let exact = failure_probability(p, m);
    if exact > bound + 1e-12 {
        return Err(Error::LemmaViolation(format!(
            "p_fail({p}, {m}) = {exact} exceeds {bound}"
        )));
    }
    Ok(bound)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PlaneState {
    Current,
    CurrentPerp,
    Next,
    NextPerp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarkovOutcome {
    pub terminated: bool,
    pub measurements: u64,
}

/// Four-state chain of the repair loop, capped at `max_alternations` repairs.
pub fn markov_simulate<R: Rng + ?Sized>(p: f64, max_alternations: u64, rng: &mut R) -> Result<MarkovOutcome> {
    check_overlap(p)?;
    let mut state = PlaneState::Current;
    let mut measurements = 0u64;
    let mut alternations = 0u64;
    loop {
        // Measure H_{t+1}.
        let stay_prob = match state {
            PlaneState::Current => p,
            PlaneState::CurrentPerp => 1.0 - p,
            _ => unreachable!("H_{{t+1}} is measured from the H_t plane states only"),
        };
        measurements += 1;
        state = if rng.random::<f64>() < stay_prob {
            PlaneState::Next
        } else {
            PlaneState::NextPerp
        };
        if state == PlaneState::Next {
            return Ok(MarkovOutcome {
                terminated: true,
                measurements,
            });
        }
        if alternations == max_alternations {
            return Ok(MarkovOutcome {
                terminated: false,
                measurements,
            });
        }
        // Undo with H_t: psi_{t+1}^perp -> psi_t with 1 - p, -> psi_t^perp with p.
        measurements += 1;
        alternations += 1;
        state = if rng.random::<f64>() < 1.0 - p {
            PlaneState::Current
        } else {
            PlaneState::CurrentPerp
        };
    }
}

/// Repair-loop sizing: `s = ceil(|V| / (2 e eps))`, `m = ceil(kappa^2 |V| / (2 e eps))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alternations {
    pub s: u64,
    pub m: u64,
}

pub fn required_alternations(kappa: f64, vertices: usize, eps: f64) -> Result<Alternations> {
    if !(kappa >= 1.0) || vertices < 2 || !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!(
            "need kappa >= 1, |V| >= 2, 0 < eps < 1 (got {kappa}, {vertices}, {eps})"
        )));
    }
    let base = vertices as f64 / (2.0 * std::f64::consts::E * eps);
    Ok(Alternations {
        s: base.ceil() as u64,
        m: (kappa * kappa * base).ceil() as u64,
    })
}

/// `kappa^2 |V|^2 / (e eps) + |V|`.
pub fn measurement_bound(kappa: f64, vertices: usize, eps: f64) -> f64 {
    let n = vertices as f64;
    kappa * kappa * n * n / (std::f64::consts::E * eps) + n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostInputs {
    pub vertices: usize,
    pub edges: usize,
    pub kappa: f64,
    pub eps: f64,
    pub gap: f64,
    pub physical_dim: usize,
    pub degree: usize,
}

impl CostInputs {
    pub fn for_graph(graph: &InteractionGraph, kappa: f64, eps: f64, gap: f64) -> Self {
        Self {
            vertices: graph.vertex_count(),
            edges: graph.edges().len(),
            kappa,
            eps,
            gap,
            physical_dim: graph.physical_dims().iter().copied().max().unwrap_or(1),
            degree: graph.degree_bound(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBounds {
    pub measurement_bound: f64,
    /// `|V|^2 |E|^2 kappa^2 / (eps gap) + |V| k d^6` with polylog factors dropped;
    /// an order-of-magnitude figure.
    pub runtime_bound: f64,
}

pub fn cost_model(inputs: &CostInputs) -> Result<CostBounds> {
    let CostInputs {
        vertices,
        edges,
        kappa,
        eps,
        gap,
        physical_dim,
        degree,
    } = *inputs;
    let counts_positive = vertices > 0 && edges > 0 && physical_dim > 0 && degree > 0;
    let reals_positive = [kappa, eps, gap].iter().all(|x| *x > 0.0 && x.is_finite());
    if !counts_positive || !reals_positive {
        return Err(Error::InvalidInput("cost model arguments must all be positive".into()));
    }
    let (n, e, d, k) = (vertices as f64, edges as f64, physical_dim as f64, degree as f64);
    Ok(CostBounds {
        measurement_bound: measurement_bound(kappa, vertices, eps),
        runtime_bound: n * n * e * e * kappa * kappa / (eps * gap) + n * k * d.powi(6),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// Stop a vertex after `m` repair alternations and report failure.
    Bounded,
    /// Repeat the repair loop until it succeeds.
    #[value(name = "until_success")]
    UntilSuccess,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub seed: u64,
    pub eps: f64,
    pub mode: RunMode,
}

/// What happened while processing one vertex. Every binary measurement is
/// counted, the first one included, so a vertex uses at most `2m + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub step: usize,
    pub vertex: usize,
    /// Outcomes in order; even positions measure `H_{t+1}`, odd ones `H_t`.
    pub outcomes: Vec<EnergyLabel>,
    pub measurements: u64,
    pub alternations: u64,
    /// Born probability of a zero outcome on the first measurement.
    pub first_shot_probability: f64,
    pub kappa: f64,
    pub overlap: f64,
    pub gap: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub mode: RunMode,
    pub eps: f64,
    pub kappa: f64,
    /// Alternation cap per vertex in bounded mode.
    pub max_alternations: Option<u64>,
    pub vertices: Vec<VertexRecord>,
    pub success: bool,
    pub final_fidelity: Option<f64>,
    pub total_measurements: u64,
    pub measurement_bound: f64,
}

/// A PEPS with every `H_t` pre-analyzed, ready for repeated runs.
#[derive(Debug, Clone)]
pub struct Simulation {
    peps: Peps,
    analyses: Vec<GroundAnalysis>,
    overlaps: Vec<f64>,
    target: StateVector,
}

impl Simulation {
    /// Pre-flight: builds `H_0 ..= H_n` and requires each to have a unique
    /// zero-energy ground state.
    pub fn prepare(peps: Peps, c: f64, zero_tol: f64) -> Result<Self> {
        let sequence = hamiltonian::hamiltonian_sequence(&peps, c)?;
        let analyses = sequence
            .iter()
            .map(|h| hamiltonian::ground_analysis(h, zero_tol))
            .collect::<Result<Vec<_>>>()?;
        let overlaps = analyses
            .windows(2)
            .enumerate()
            .map(|(t, w)| {
                let p = w[1].ground_state.fidelity(&w[0].ground_state);
                if p < 1e-12 {
                    Err(Error::OrthogonalTargets { step: t, overlap: p })
                } else {
                    Ok(p)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let target = peps.contract_original()?;
        Ok(Self {
            peps,
            analyses,
            overlaps,
            target,
        })
    }

    pub fn peps(&self) -> &Peps {
        &self.peps
    }

    pub fn analyses(&self) -> &[GroundAnalysis] {
        &self.analyses
    }

    /// `p_t = |<psi_{t+1}|psi_t>|^2` for each step.
    pub fn overlaps(&self) -> &[f64] {
        &self.overlaps
    }

    pub fn min_gap(&self) -> f64 {
        self.analyses.iter().map(|a| a.gap).fold(f64::INFINITY, f64::min)
    }

    /// Repair loop for step `t` starting from `state`, which should be the
    /// ground state of `H_t`.
    pub fn repair_step<R: Rng + ?Sized>(
        &self,
        t: usize,
        state: StateVector,
        max_alternations: Option<u64>,
        rng: &mut R,
    ) -> Result<(VertexRecord, StateVector)> {
        let (current, next) = (&self.analyses[t].projector, &self.analyses[t + 1].projector);
        let vertex = self.peps.vertex_at(t);
        let first = measure_zero_energy(&state, next, rng)?;
        let first_shot_probability = match first.label {
            EnergyLabel::Zero => first.probability,
            EnergyLabel::Nonzero => 1.0 - first.probability,
        };
        let mut outcomes = vec![first.label];
        let mut state = first.state;
        let mut alternations = 0u64;
        let cap = max_alternations.unwrap_or(u64::MAX);
        while *outcomes.last().expect("non-empty") == EnergyLabel::Nonzero {
            if alternations == cap || outcomes.len() as u64 >= UNBOUNDED_MEASUREMENT_LIMIT {
                break;
            }
            let undo = measure_zero_energy(&state, current, rng)?;
            let redo = measure_zero_energy(&undo.state, next, rng)?;
            outcomes.push(undo.label);
            outcomes.push(redo.label);
            state = redo.state;
            alternations += 1;
        }
        let success = *outcomes.last().expect("non-empty") == EnergyLabel::Zero;
        if !success && max_alternations.is_none() {
            return Err(Error::Numerical(format!("repair loop at step {t} did not terminate")));
        }
        let record = VertexRecord {
            step: t,
            vertex,
            measurements: outcomes.len() as u64,
            outcomes,
            alternations,
            first_shot_probability,
            kappa: self.peps.tensor(vertex).kappa,
            overlap: self.overlaps[t],
            gap: self.analyses[t + 1].gap,
            success,
        };
        Ok((record, state))
    }

    pub fn run(&self, params: &RunParams) -> Result<RunReport> {
        let graph = self.peps.graph();
        let n = graph.vertex_count();
        let kappa = self.peps.kappa();
        let max_alternations = match params.mode {
            RunMode::Bounded => Some(required_alternations(kappa, n, params.eps)?.m),
            RunMode::UntilSuccess => {
                if !(params.eps > 0.0 && params.eps < 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "eps must lie in (0, 1), got {}",
                        params.eps
                    )));
                }
                None
            }
        };
        let mut state = self.peps.pair_state();
        let mut vertices = Vec::with_capacity(n);
        let mut success = true;
        for t in 0..n {
            let mut rng = step_rng(params.seed, t);
            let (record, next) = self.repair_step(t, state, max_alternations, &mut rng)?;
            state = next;
            let ok = record.success;
            vertices.push(record);
            if !ok {
                success = false;
                break;
            }
        }
        let final_fidelity = if success {
            Some(self.peps.restore_gauge(&state)?.fidelity(&self.target))
        } else {
            None
        };
        Ok(RunReport {
            seed: params.seed,
            mode: params.mode,
            eps: params.eps,
            kappa,
            max_alternations,
            total_measurements: vertices.iter().map(|r| r.measurements).sum(),
            vertices,
            success,
            final_fidelity,
            measurement_bound: measurement_bound(kappa, n, params.eps),
        })
    }
}

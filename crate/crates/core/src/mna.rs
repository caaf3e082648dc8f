//! Modified nodal analysis over parsed circuits.
//!
//! Unknowns are the non-ground node voltages plus branch currents for
//! voltage-defined elements (sources, inductors, op-amp outputs). Analyses:
//!
//! - DC operating point: capacitors open, inductors as 0 V branches,
//!   memristors at their initial memristance.
//! - AC sweep: complex stamps G, jwC, branch-form jwL, memristors frozen at
//!   the operating-point state, op-amps as nullors; outputs normalized by
//!   the AC source magnitude.
//! - Transient: trapezoidal companion models for L and C, memristor state
//!   advanced step by step, sources evaluated as dc + sine(t). Initial
//!   conditions are at rest (capacitors 0 V, inductors 0 A).

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{solve_dense, Scalar};
use crate::memristor::{self, MemristorState};
use crate::netlist::{Circuit, Element, ElementKind, SourceSpec};
use crate::tf::{FrequencyResponse, TfError, Waveform, TWO_PI};

#[derive(Debug, Error, PartialEq)]
pub enum MnaError {
    #[error("singular MNA matrix ({context})")]
    SingularMatrix { context: String },
    #[error("no element carries an AC specification")]
    NoAcSource,
    #[error("{count} elements carry an AC specification; exactly one is required")]
    MultipleAcSources { count: usize },
    #[error("Newton iteration diverged at t = {time} (residual {residual:.3e})")]
    NewtonDivergence { time: f64, residual: f64 },
    #[error(transparent)]
    Response(#[from] TfError),
}

/// Maximum Newton iterations per transient step.
const NEWTON_MAX_ITERS: usize = 50;
/// Relative convergence tolerance on the solution vector.
const NEWTON_REL_TOL: f64 = 1e-9;

/// Companion-model discretization for transient analysis. Trapezoidal is
/// the default (A-stable, second order); backward Euler is available as a
/// fallback that damps numerical ringing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    Trapezoidal,
    BackwardEuler,
}

/// Unknown layout shared by every analysis on a circuit.
struct Layout {
    node_index: BTreeMap<String, usize>,
    branch_index: BTreeMap<String, usize>,
    n: usize,
}

impl Layout {
    fn build(circuit: &Circuit) -> Self {
        let mut node_index = BTreeMap::new();
        for node in circuit.nodes() {
            if node != "0" {
                let next = node_index.len();
                node_index.insert(node, next);
            }
        }
        let n_nodes = node_index.len();
        let mut branch_index = BTreeMap::new();
        for e in &circuit.elements {
            if matches!(
                e.kind,
                ElementKind::VoltageSource { .. }
                    | ElementKind::Inductor { .. }
                    | ElementKind::IdealOpAmp
            ) {
                let next = n_nodes + branch_index.len();
                branch_index.insert(e.name.clone(), next);
            }
        }
        let n = n_nodes + branch_index.len();
        Self {
            node_index,
            branch_index,
            n,
        }
    }

    fn node(&self, name: &str) -> Option<usize> {
        if name == "0" {
            None
        } else {
            Some(self.node_index[name])
        }
    }

    fn branch(&self, element: &str) -> usize {
        self.branch_index[element]
    }
}

fn stamp_conductance<T: Scalar>(m: &mut [Vec<T>], a: Option<usize>, b: Option<usize>, g: T) {
    if let Some(i) = a {
        m[i][i] = m[i][i] + g;
    }
    if let Some(i) = b {
        m[i][i] = m[i][i] + g;
    }
    if let (Some(i), Some(j)) = (a, b) {
        m[i][j] = m[i][j] - g;
        m[j][i] = m[j][i] - g;
    }
}

/// Voltage-defined branch: KCL columns at the terminal nodes plus the
/// branch constraint row V(a) - V(b) + z*i = rhs.
fn stamp_branch<T: Scalar>(
    m: &mut [Vec<T>],
    rhs: &mut [T],
    a: Option<usize>,
    b: Option<usize>,
    j: usize,
    z: T,
    value: T,
) {
    if let Some(i) = a {
        m[i][j] = m[i][j] + T::one();
        m[j][i] = m[j][i] + T::one();
    }
    if let Some(i) = b {
        m[i][j] = m[i][j] - T::one();
        m[j][i] = m[j][i] - T::one();
    }
    m[j][j] = m[j][j] + z;
    rhs[j] = rhs[j] + value;
}

fn stamp_opamp<T: Scalar>(
    m: &mut [Vec<T>],
    inp: Option<usize>,
    inn: Option<usize>,
    out: Option<usize>,
    j: usize,
) {
    // Constraint row: V(in+) - V(in-) = 0; output node supplies the branch
    // current; the inputs draw none.
    if let Some(i) = inp {
        m[j][i] = m[j][i] + T::one();
    }
    if let Some(i) = inn {
        m[j][i] = m[j][i] - T::one();
    }
    if let Some(i) = out {
        m[i][j] = m[i][j] + T::one();
    }
}

fn memristance_at_start(params: &crate::memristor::MemristorParams, w0_frac: f64) -> f64 {
    let state = MemristorState::from_fraction(params, w0_frac);
    memristor::memristance(params, &state)
}

/// DC operating point.
#[derive(Debug, Clone)]
pub struct DcSolution {
    /// Node voltages including ground ("0" -> 0.0).
    pub node_voltages: BTreeMap<String, f64>,
    /// Branch currents of sources, inductors and op-amp outputs.
    pub branch_currents: BTreeMap<String, f64>,
    /// Max over nodes of |sum of branch currents|, amperes.
    pub kcl_residual: f64,
}

pub fn dc_operating_point(circuit: &Circuit) -> Result<DcSolution, MnaError> {
    let layout = Layout::build(circuit);
    let n = layout.n;
    let mut m = vec![vec![0.0f64; n]; n];
    let mut rhs = vec![0.0f64; n];

    for e in &circuit.elements {
        match &e.kind {
            ElementKind::Resistor { ohms } => {
                let (a, b) = two_nodes(&layout, e);
                stamp_conductance(&mut m, a, b, 1.0 / ohms);
            }
            ElementKind::Memristor { params, w0_frac } => {
                let (a, b) = two_nodes(&layout, e);
                stamp_conductance(&mut m, a, b, 1.0 / memristance_at_start(params, *w0_frac));
            }
            ElementKind::Capacitor { .. } => {} // open at DC
            ElementKind::Inductor { .. } => {
                let (a, b) = two_nodes(&layout, e);
                let j = layout.branch(&e.name);
                stamp_branch(&mut m, &mut rhs, a, b, j, 0.0, 0.0); // 0 V short
            }
            ElementKind::VoltageSource { spec } => {
                let (a, b) = two_nodes(&layout, e);
                let j = layout.branch(&e.name);
                stamp_branch(&mut m, &mut rhs, a, b, j, 0.0, spec.dc);
            }
            ElementKind::IdealOpAmp => {
                let j = layout.branch(&e.name);
                stamp_opamp(
                    &mut m,
                    layout.node(&e.terminals[0]),
                    layout.node(&e.terminals[1]),
                    layout.node(&e.terminals[2]),
                    j,
                );
            }
        }
    }

    let x = solve_dense(m, &rhs).ok_or_else(|| MnaError::SingularMatrix {
        context: "dc operating point".into(),
    })?;

    let mut node_voltages = BTreeMap::new();
    node_voltages.insert("0".to_string(), 0.0);
    for (name, &idx) in &layout.node_index {
        node_voltages.insert(name.clone(), x[idx]);
    }
    let mut branch_currents = BTreeMap::new();
    for (name, &idx) in &layout.branch_index {
        branch_currents.insert(name.clone(), x[idx]);
    }
    let mut solution = DcSolution {
        node_voltages,
        branch_currents,
        kcl_residual: 0.0,
    };
    solution.kcl_residual = dc_kcl_residual(circuit, &solution);
    Ok(solution)
}

/// Max over nodes of the absolute KCL current sum, recomputed from element
/// constitutive relations.
pub fn dc_kcl_residual(circuit: &Circuit, sol: &DcSolution) -> f64 {
    let mut sums: BTreeMap<&str, f64> = BTreeMap::new();
    let v = |name: &str| sol.node_voltages[name];
    for e in &circuit.elements {
        match &e.kind {
            ElementKind::Resistor { ohms } => {
                let i = (v(&e.terminals[0]) - v(&e.terminals[1])) / ohms;
                *sums.entry(&e.terminals[0]).or_default() += i;
                *sums.entry(&e.terminals[1]).or_default() -= i;
            }
            ElementKind::Memristor { params, w0_frac } => {
                let g = 1.0 / memristance_at_start(params, *w0_frac);
                let i = (v(&e.terminals[0]) - v(&e.terminals[1])) * g;
                *sums.entry(&e.terminals[0]).or_default() += i;
                *sums.entry(&e.terminals[1]).or_default() -= i;
            }
            ElementKind::Capacitor { .. } => {}
            ElementKind::Inductor { .. } | ElementKind::VoltageSource { .. } => {
                let i = sol.branch_currents[&e.name];
                *sums.entry(&e.terminals[0]).or_default() += i;
                *sums.entry(&e.terminals[1]).or_default() -= i;
            }
            ElementKind::IdealOpAmp => {
                let i = sol.branch_currents[&e.name];
                *sums.entry(&e.terminals[2]).or_default() += i;
            }
        }
    }
    sums.iter()
        .filter(|(node, _)| **node != "0")
        .map(|(_, s)| s.abs())
        .fold(0.0, f64::max)
}

/// One solved AC frequency point (unnormalized).
#[derive(Debug, Clone)]
pub struct AcPoint {
    pub freq_hz: f64,
    pub node_voltages: BTreeMap<String, Complex64>,
    pub branch_currents: BTreeMap<String, Complex64>,
}

/// AC sweep output: per-probe transfer responses V(node)/V(source) plus the
/// raw per-frequency solutions.
#[derive(Debug, Clone)]
pub struct AcSolution {
    pub freqs: Vec<f64>,
    pub responses: BTreeMap<String, FrequencyResponse>,
    pub points: Vec<AcPoint>,
}

pub fn ac_sweep(circuit: &Circuit, freqs: &[f64]) -> Result<AcSolution, MnaError> {
    let ac_sources: Vec<(&Element, f64)> = circuit
        .elements
        .iter()
        .filter_map(|e| match &e.kind {
            ElementKind::VoltageSource { spec } => {
                // A zero-magnitude AC spec cannot serve as the reference.
                spec.ac_mag.filter(|m| *m != 0.0).map(|m| (e, m))
            }
            _ => None,
        })
        .collect();
    if ac_sources.is_empty() {
        return Err(MnaError::NoAcSource);
    }
    if ac_sources.len() > 1 {
        return Err(MnaError::MultipleAcSources {
            count: ac_sources.len(),
        });
    }
    let (ac_name, ac_mag) = (ac_sources[0].0.name.clone(), ac_sources[0].1);

    let layout = Layout::build(circuit);
    let n = layout.n;
    let zero = Complex64::new(0.0, 0.0);
    let mut points = Vec::with_capacity(freqs.len());

    for &f in freqs {
        let omega = TWO_PI * f;
        let mut m = vec![vec![zero; n]; n];
        let mut rhs = vec![zero; n];
        for e in &circuit.elements {
            match &e.kind {
                ElementKind::Resistor { ohms } => {
                    let (a, b) = two_nodes(&layout, e);
                    stamp_conductance(&mut m, a, b, Complex64::new(1.0 / ohms, 0.0));
                }
                ElementKind::Memristor { params, w0_frac } => {
                    let (a, b) = two_nodes(&layout, e);
                    let g = 1.0 / memristance_at_start(params, *w0_frac);
                    stamp_conductance(&mut m, a, b, Complex64::new(g, 0.0));
                }
                ElementKind::Capacitor { farads } => {
                    let (a, b) = two_nodes(&layout, e);
                    stamp_conductance(&mut m, a, b, Complex64::new(0.0, omega * farads));
                }
                ElementKind::Inductor { henries } => {
                    let (a, b) = two_nodes(&layout, e);
                    let j = layout.branch(&e.name);
                    stamp_branch(
                        &mut m,
                        &mut rhs,
                        a,
                        b,
                        j,
                        Complex64::new(0.0, -omega * henries),
                        zero,
                    );
                }
                ElementKind::VoltageSource { spec } => {
                    let (a, b) = two_nodes(&layout, e);
                    let j = layout.branch(&e.name);
                    let value = if e.name == ac_name {
                        Complex64::new(spec.ac_mag.unwrap_or(0.0), 0.0)
                    } else {
                        zero
                    };
                    stamp_branch(&mut m, &mut rhs, a, b, j, zero, value);
                }
                ElementKind::IdealOpAmp => {
                    let j = layout.branch(&e.name);
                    stamp_opamp(
                        &mut m,
                        layout.node(&e.terminals[0]),
                        layout.node(&e.terminals[1]),
                        layout.node(&e.terminals[2]),
                        j,
                    );
                }
            }
        }
        let x = solve_dense(m, &rhs).ok_or_else(|| MnaError::SingularMatrix {
            context: format!("ac sweep at {f} Hz"),
        })?;
        let mut node_voltages = BTreeMap::new();
        node_voltages.insert("0".to_string(), zero);
        for (name, &idx) in &layout.node_index {
            node_voltages.insert(name.clone(), x[idx]);
        }
        let mut branch_currents = BTreeMap::new();
        for (name, &idx) in &layout.branch_index {
            branch_currents.insert(name.clone(), x[idx]);
        }
        points.push(AcPoint {
            freq_hz: f,
            node_voltages,
            branch_currents,
        });
    }

    let mut responses = BTreeMap::new();
    for probe in &circuit.probes {
        let samples: Vec<(f64, Complex64)> = points
            .iter()
            .map(|p| (p.freq_hz, p.node_voltages[probe] / ac_mag))
            .collect();
        responses.insert(probe.clone(), FrequencyResponse::from_samples(samples)?);
    }

    Ok(AcSolution {
        freqs: freqs.to_vec(),
        responses,
        points,
    })
}

/// Max over frequency points and nodes of the relative KCL residual
/// (current sum normalized by the largest element current at that point).
pub fn ac_kcl_residual(circuit: &Circuit, sol: &AcSolution) -> f64 {
    let mut worst: f64 = 0.0;
    for p in &sol.points {
        let omega = TWO_PI * p.freq_hz;
        let v = |name: &str| p.node_voltages[name];
        // (current, from-node, optional to-node) per element
        let mut flows: Vec<(Complex64, &str, Option<&str>)> = Vec::new();
        for e in &circuit.elements {
            let flow = match &e.kind {
                ElementKind::Resistor { ohms } => (
                    (v(&e.terminals[0]) - v(&e.terminals[1])) / ohms,
                    e.terminals[0].as_str(),
                    Some(e.terminals[1].as_str()),
                ),
                ElementKind::Memristor { params, w0_frac } => {
                    let g = 1.0 / memristance_at_start(params, *w0_frac);
                    (
                        (v(&e.terminals[0]) - v(&e.terminals[1])) * g,
                        e.terminals[0].as_str(),
                        Some(e.terminals[1].as_str()),
                    )
                }
                ElementKind::Capacitor { farads } => (
                    (v(&e.terminals[0]) - v(&e.terminals[1])) * Complex64::new(0.0, omega * farads),
                    e.terminals[0].as_str(),
                    Some(e.terminals[1].as_str()),
                ),
                ElementKind::Inductor { .. } | ElementKind::VoltageSource { .. } => (
                    p.branch_currents[&e.name],
                    e.terminals[0].as_str(),
                    Some(e.terminals[1].as_str()),
                ),
                ElementKind::IdealOpAmp => {
                    (p.branch_currents[&e.name], e.terminals[2].as_str(), None)
                }
            };
            flows.push(flow);
        }
        let scale = flows
            .iter()
            .map(|(i, _, _)| i.norm())
            .fold(f64::MIN_POSITIVE, f64::max);
        let mut sums: BTreeMap<&str, Complex64> = BTreeMap::new();
        for (i, from, to) in flows {
            *sums.entry(from).or_insert_with(|| Complex64::new(0.0, 0.0)) += i;
            if let Some(to) = to {
                *sums.entry(to).or_insert_with(|| Complex64::new(0.0, 0.0)) -= i;
            }
        }
        for (node, s) in &sums {
            if *node != "0" {
                worst = worst.max(s.norm() / scale);
            }
        }
    }
    worst
}

/// Transient simulation output.
#[derive(Debug, Clone)]
pub struct TransientSolution {
    pub dt: f64,
    pub times: Vec<f64>,
    /// Probe node waveforms, keyed by node name.
    pub probes: BTreeMap<String, Waveform>,
    /// Memristor state trajectories as w/d fractions, keyed by element name.
    pub memristor_fraction: BTreeMap<String, Vec<f64>>,
    /// Worst relative KCL residual observed across all steps.
    pub max_kcl_rel_residual: f64,
}

struct CapHistory {
    v: f64,
    i: f64,
}

struct IndHistory {
    i: f64,
    v: f64,
}

fn source_value(spec: &SourceSpec, t: f64) -> f64 {
    let mut v = spec.dc;
    if let Some(sine) = spec.sine {
        v += sine.amplitude * (TWO_PI * sine.freq_hz * t).sin();
    }
    v
}

pub fn transient(circuit: &Circuit, dt: f64, t_end: f64) -> Result<TransientSolution, MnaError> {
    transient_with(circuit, dt, t_end, Integrator::Trapezoidal)
}

pub fn transient_with(
    circuit: &Circuit,
    dt: f64,
    t_end: f64,
    integrator: Integrator,
) -> Result<TransientSolution, MnaError> {
    assert!(dt > 0.0 && t_end >= dt, "need dt > 0 and t_end >= dt");
    let layout = Layout::build(circuit);
    let steps = (t_end / dt + 1e-9).floor() as usize;
    // Companion coefficients: trapezoidal carries the previous device
    // current/voltage in its history term, backward Euler does not.
    let (comp_scale, carry_history) = match integrator {
        Integrator::Trapezoidal => (2.0, 1.0),
        Integrator::BackwardEuler => (1.0, 0.0),
    };

    // Per-element state, keyed by element order.
    let mut caps: BTreeMap<String, CapHistory> = BTreeMap::new();
    let mut inds: BTreeMap<String, IndHistory> = BTreeMap::new();
    let mut mem_states: BTreeMap<String, MemristorState> = BTreeMap::new();
    for e in &circuit.elements {
        match &e.kind {
            ElementKind::Capacitor { .. } => {
                caps.insert(e.name.clone(), CapHistory { v: 0.0, i: 0.0 });
            }
            ElementKind::Inductor { .. } => {
                inds.insert(e.name.clone(), IndHistory { i: 0.0, v: 0.0 });
            }
            ElementKind::Memristor { params, w0_frac } => {
                mem_states.insert(
                    e.name.clone(),
                    MemristorState::from_fraction(params, *w0_frac),
                );
            }
            _ => {}
        }
    }

    let mut times = Vec::with_capacity(steps + 1);
    let mut probe_data: BTreeMap<String, Vec<f64>> = circuit
        .probes
        .iter()
        .map(|p| (p.clone(), Vec::with_capacity(steps + 1)))
        .collect();
    let mut mem_frac: BTreeMap<String, Vec<f64>> = mem_states
        .keys()
        .map(|k| (k.clone(), Vec::with_capacity(steps + 1)))
        .collect();
    let mut max_residual: f64 = 0.0;

    // t = 0: algebraic solve with capacitors pinned at 0 V (extra branch
    // unknowns) and inductors open, establishing consistent histories.
    {
        let extra = caps.len();
        let n = layout.n + extra;
        let mut cap_branch: BTreeMap<&str, usize> = BTreeMap::new();
        let mut next = layout.n;
        for e in &circuit.elements {
            if matches!(e.kind, ElementKind::Capacitor { .. }) {
                cap_branch.insert(&e.name, next);
                next += 1;
            }
        }
        let mut m = vec![vec![0.0f64; n]; n];
        let mut rhs = vec![0.0f64; n];
        for e in &circuit.elements {
            match &e.kind {
                ElementKind::Resistor { ohms } => {
                    let (a, b) = two_nodes(&layout, e);
                    stamp_conductance(&mut m, a, b, 1.0 / ohms);
                }
                ElementKind::Memristor { params, .. } => {
                    let (a, b) = two_nodes(&layout, e);
                    let g = 1.0 / memristor::memristance(params, &mem_states[&e.name]);
                    stamp_conductance(&mut m, a, b, g);
                }
                ElementKind::Capacitor { .. } => {
                    let (a, b) = two_nodes(&layout, e);
                    let j = cap_branch[e.name.as_str()];
                    stamp_branch(&mut m, &mut rhs, a, b, j, 0.0, 0.0);
                }
                ElementKind::Inductor { .. } => {
                    // open at t = 0 (zero initial current); keep its branch
                    // variable pinned to zero so the matrix stays regular.
                    let j = layout.branch(&e.name);
                    m[j][j] = 1.0;
                }
                ElementKind::VoltageSource { spec } => {
                    let (a, b) = two_nodes(&layout, e);
                    let j = layout.branch(&e.name);
                    stamp_branch(&mut m, &mut rhs, a, b, j, 0.0, source_value(spec, 0.0));
                }
                ElementKind::IdealOpAmp => {
                    let j = layout.branch(&e.name);
                    stamp_opamp(
                        &mut m,
                        layout.node(&e.terminals[0]),
                        layout.node(&e.terminals[1]),
                        layout.node(&e.terminals[2]),
                        j,
                    );
                }
            }
        }
        let x = solve_dense(m, &rhs).ok_or_else(|| MnaError::SingularMatrix {
            context: "transient initial solve".into(),
        })?;
        let volt =
            |name: &str, x: &[f64]| -> f64 { layout.node(name).map(|i| x[i]).unwrap_or(0.0) };
        times.push(0.0);
        for (probe, data) in probe_data.iter_mut() {
            data.push(volt(probe, &x));
        }
        for e in &circuit.elements {
            match &e.kind {
                ElementKind::Capacitor { .. } => {
                    let h = caps.get_mut(&e.name).unwrap();
                    h.v = 0.0;
                    h.i = x[cap_branch[e.name.as_str()]];
                }
                ElementKind::Inductor { .. } => {
                    let h = inds.get_mut(&e.name).unwrap();
                    h.i = 0.0;
                    h.v = volt(&e.terminals[0], &x) - volt(&e.terminals[1], &x);
                }
                ElementKind::Memristor { params, .. } => {
                    let state = mem_states.get_mut(&e.name).unwrap();
                    let g = 1.0 / memristor::memristance(params, state);
                    let i = (volt(&e.terminals[0], &x) - volt(&e.terminals[1], &x)) * g;
                    mem_frac
                        .get_mut(&e.name)
                        .unwrap()
                        .push(state.fraction(params));
                    *state = memristor::step_state(params, state, i, dt);
                }
                _ => {}
            }
        }
    }

    // Time stepping with trapezoidal companions.
    for k in 1..=steps {
        let t = k as f64 * dt;
        let n = layout.n;
        let mut prev_x: Option<Vec<f64>> = None;
        let mut x = vec![0.0f64; n];
        let mut converged = false;

        for _iter in 0..NEWTON_MAX_ITERS {
            let mut m = vec![vec![0.0f64; n]; n];
            let mut rhs = vec![0.0f64; n];
            for e in &circuit.elements {
                match &e.kind {
                    ElementKind::Resistor { ohms } => {
                        let (a, b) = two_nodes(&layout, e);
                        stamp_conductance(&mut m, a, b, 1.0 / ohms);
                    }
                    ElementKind::Memristor { params, .. } => {
                        let (a, b) = two_nodes(&layout, e);
                        let g = 1.0 / memristor::memristance(params, &mem_states[&e.name]);
                        stamp_conductance(&mut m, a, b, g);
                    }
                    ElementKind::Capacitor { farads } => {
                        let (a, b) = two_nodes(&layout, e);
                        let h = &caps[&e.name];
                        let geq = comp_scale * farads / dt;
                        let hist = geq * h.v + carry_history * h.i;
                        stamp_conductance(&mut m, a, b, geq);
                        if let Some(i) = a {
                            rhs[i] += hist;
                        }
                        if let Some(i) = b {
                            rhs[i] -= hist;
                        }
                    }
                    ElementKind::Inductor { henries } => {
                        let (a, b) = two_nodes(&layout, e);
                        let j = layout.branch(&e.name);
                        let h = &inds[&e.name];
                        let zeq = comp_scale * henries / dt;
                        stamp_branch(
                            &mut m,
                            &mut rhs,
                            a,
                            b,
                            j,
                            -zeq,
                            -zeq * h.i - carry_history * h.v,
                        );
                    }
                    ElementKind::VoltageSource { spec } => {
                        let (a, b) = two_nodes(&layout, e);
                        let j = layout.branch(&e.name);
                        stamp_branch(&mut m, &mut rhs, a, b, j, 0.0, source_value(spec, t));
                    }
                    ElementKind::IdealOpAmp => {
                        let j = layout.branch(&e.name);
                        stamp_opamp(
                            &mut m,
                            layout.node(&e.terminals[0]),
                            layout.node(&e.terminals[1]),
                            layout.node(&e.terminals[2]),
                            j,
                        );
                    }
                }
            }
            x = solve_dense(m, &rhs).ok_or_else(|| MnaError::SingularMatrix {
                context: format!("transient at t = {t}"),
            })?;
            if !x.iter().all(|v| v.is_finite()) {
                return Err(MnaError::NewtonDivergence {
                    time: t,
                    residual: f64::INFINITY,
                });
            }
            if let Some(prev) = &prev_x {
                let scale = 1.0 + x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
                let delta = x
                    .iter()
                    .zip(prev)
                    .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
                if delta <= NEWTON_REL_TOL * scale {
                    converged = true;
                    break;
                }
            }
            prev_x = Some(x.clone());
        }
        if !converged {
            let residual = prev_x
                .map(|p| {
                    x.iter()
                        .zip(&p)
                        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
                })
                .unwrap_or(f64::INFINITY);
            return Err(MnaError::NewtonDivergence { time: t, residual });
        }

        let volt =
            |name: &str, x: &[f64]| -> f64 { layout.node(name).map(|i| x[i]).unwrap_or(0.0) };

        // KCL residual from the companion stamps, relative to the largest
        // element current this step.
        {
            let mut sums: BTreeMap<&str, f64> = BTreeMap::new();
            let mut scale: f64 = 0.0;
            for e in &circuit.elements {
                let va = volt(&e.terminals[0], &x);
                let vb = if e.terminals.len() > 1 {
                    volt(&e.terminals[1], &x)
                } else {
                    0.0
                };
                let (current, node_a, node_b): (f64, &str, Option<&str>) = match &e.kind {
                    ElementKind::Resistor { ohms } => {
                        ((va - vb) / ohms, &e.terminals[0], Some(&e.terminals[1]))
                    }
                    ElementKind::Memristor { params, .. } => {
                        let g = 1.0 / memristor::memristance(params, &mem_states[&e.name]);
                        ((va - vb) * g, &e.terminals[0], Some(&e.terminals[1]))
                    }
                    ElementKind::Capacitor { farads } => {
                        let h = &caps[&e.name];
                        let geq = comp_scale * farads / dt;
                        (
                            geq * (va - vb) - (geq * h.v + carry_history * h.i),
                            &e.terminals[0],
                            Some(&e.terminals[1]),
                        )
                    }
                    ElementKind::Inductor { .. } | ElementKind::VoltageSource { .. } => (
                        x[layout.branch(&e.name)],
                        &e.terminals[0],
                        Some(&e.terminals[1]),
                    ),
                    ElementKind::IdealOpAmp => (x[layout.branch(&e.name)], &e.terminals[2], None),
                };
                scale = scale.max(current.abs());
                *sums.entry(node_a).or_default() += current;
                if let Some(b) = node_b {
                    *sums.entry(b).or_default() -= current;
                }
            }
            let scale = scale.max(f64::MIN_POSITIVE);
            for (node, s) in &sums {
                if *node != "0" {
                    max_residual = max_residual.max(s.abs() / scale);
                }
            }
        }

        // Commit histories and record outputs.
        times.push(t);
        for (probe, data) in probe_data.iter_mut() {
            data.push(volt(probe, &x));
        }
        for e in &circuit.elements {
            match &e.kind {
                ElementKind::Capacitor { farads } => {
                    let h = caps.get_mut(&e.name).unwrap();
                    let v_now = volt(&e.terminals[0], &x) - volt(&e.terminals[1], &x);
                    let geq = comp_scale * farads / dt;
                    let i_now = geq * (v_now - h.v) - carry_history * h.i;
                    h.v = v_now;
                    h.i = i_now;
                }
                ElementKind::Inductor { .. } => {
                    let h = inds.get_mut(&e.name).unwrap();
                    h.i = x[layout.branch(&e.name)];
                    h.v = volt(&e.terminals[0], &x) - volt(&e.terminals[1], &x);
                }
                ElementKind::Memristor { params, .. } => {
                    let state = mem_states.get_mut(&e.name).unwrap();
                    let g = 1.0 / memristor::memristance(params, state);
                    let i = (volt(&e.terminals[0], &x) - volt(&e.terminals[1], &x)) * g;
                    mem_frac
                        .get_mut(&e.name)
                        .unwrap()
                        .push(state.fraction(params));
                    *state = memristor::step_state(params, state, i, dt);
                }
                _ => {}
            }
        }
    }

    let probes = probe_data
        .into_iter()
        .map(|(name, data)| (name.clone(), Waveform::new(0.0, dt, data)))
        .collect();

    Ok(TransientSolution {
        dt,
        times,
        probes,
        memristor_fraction: mem_frac,
        max_kcl_rel_residual: max_residual,
    })
}

fn two_nodes(layout: &Layout, e: &Element) -> (Option<usize>, Option<usize>) {
    (layout.node(&e.terminals[0]), layout.node(&e.terminals[1]))
}

/// Geometric frequency grid with at least `points_per_decade` density,
/// including both endpoints.
pub fn decade_grid(f_start: f64, f_stop: f64, points_per_decade: usize) -> Vec<f64> {
    assert!(f_start > 0.0 && f_stop > f_start && points_per_decade >= 1);
    let decades = (f_stop / f_start).log10();
    let n = ((decades * points_per_decade as f64).ceil() as usize + 1).max(2);
    crate::tf::log_grid(f_start, f_stop, n)
}

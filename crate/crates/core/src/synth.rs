//! Circuit constructors: the lumped-element Gaussian-approximation ladder,
//! unity-gain Sallen-Key low-pass stages and cascades, and wholesale
//! resistor-to-memristor substitution.

use thiserror::Error;

use crate::memristor::MemristorParams;
use crate::netlist::{AnalysisDirective, Circuit, Element, ElementKind, SourceSpec};
use crate::poly::Polynomial;
use crate::tf::{RationalTf, TWO_PI};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("resistor {name} = {ohms} ohm outside the memristance range [{r_on}, {r_off}]")]
    OutOfRange {
        name: String,
        ohms: f64,
        r_on: f64,
        r_off: f64,
    },
    #[error("pole table line {line}: {reason}")]
    BadPoleTable { line: usize, reason: String },
}

/// Component values of the five-section ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderSpec {
    /// Source/load terminations R1, R5.
    pub r_end: f64,
    /// Series resistors inside the shunt RC branches, R2-R4.
    pub r_shunt_series: f64,
    /// Resistors damping the series inductors, R6-R9.
    pub r_parallel: f64,
    /// End shunt capacitors C1, C5.
    pub c_end: f64,
    /// Mid shunt capacitors C2-C4.
    pub c_mid: f64,
    /// Series inductors L1-L4.
    pub l: f64,
}

impl Default for LadderSpec {
    fn default() -> Self {
        Self {
            r_end: 500.0,
            r_shunt_series: 1e3,
            r_parallel: 2e3,
            c_end: 0.6e-6,
            c_mid: 1.2e-6,
            l: 0.1,
        }
    }
}

/// Default AC sweep attached to built circuits: 10 Hz - 10 MHz, 40 pts/dec.
const LADDER_SWEEP: (usize, f64, f64) = (40, 10.0, 1e7);

fn two_terminal(name: &str, kind: ElementKind, a: &str, b: &str) -> Element {
    Element {
        name: name.to_string(),
        kind,
        terminals: vec![a.to_string(), b.to_string()],
    }
}

fn resistor(name: &str, a: &str, b: &str, ohms: f64) -> Element {
    two_terminal(name, ElementKind::Resistor { ohms }, a, b)
}

fn capacitor(name: &str, a: &str, b: &str, farads: f64) -> Element {
    two_terminal(name, ElementKind::Capacitor { farads }, a, b)
}

fn inductor(name: &str, a: &str, b: &str, henries: f64) -> Element {
    two_terminal(name, ElementKind::Inductor { henries }, a, b)
}

/// Five-node ladder approximating a Gaussian transmission line:
/// source -> R1 -> n1, shunt C1 at n1; four series sections L_k || R_{5+k}
/// from n_k to n_{k+1}; shunt C_{k+1} with R_{k+1} in series at n2..n4,
/// C5 directly at n5; load R5 at n5, which is also the probe.
pub fn build_gaussian_ladder(spec: &LadderSpec) -> Circuit {
    let mut elements = vec![Element {
        name: "V1".into(),
        kind: ElementKind::VoltageSource {
            spec: SourceSpec {
                dc: 1.0,
                ac_mag: Some(1.0),
                sine: None,
            },
        },
        terminals: vec!["in".into(), "0".into()],
    }];

    elements.push(resistor("R1", "in", "n1", spec.r_end));
    elements.push(capacitor("C1", "n1", "0", spec.c_end));

    for k in 1..=4usize {
        let from = format!("n{k}");
        let to = format!("n{}", k + 1);
        elements.push(inductor(&format!("L{k}"), &from, &to, spec.l));
        elements.push(resistor(
            &format!("R{}", 5 + k),
            &from,
            &to,
            spec.r_parallel,
        ));
        if k <= 3 {
            // Shunt branch at n_{k+1}: C in series with R to ground.
            let mid = format!("s{}", k + 1);
            elements.push(capacitor(&format!("C{}", k + 1), &to, &mid, spec.c_mid));
            elements.push(resistor(
                &format!("R{}", k + 1),
                &mid,
                "0",
                spec.r_shunt_series,
            ));
        }
    }
    elements.push(capacitor("C5", "n5", "0", spec.c_end));
    elements.push(resistor("R5", "n5", "0", spec.r_end));

    Circuit {
        elements,
        analyses: vec![AnalysisDirective::AcSweep {
            points_per_decade: LADDER_SWEEP.0,
            f_start: LADDER_SWEEP.1,
            f_stop: LADDER_SWEEP.2,
        }],
        probes: vec!["n5".into()],
    }
}

/// A designed unity-gain Sallen-Key low-pass stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SallenKeyStage {
    pub omega0: f64,
    pub q_factor: f64,
    pub c1: f64,
    pub c2: f64,
    pub r1: f64,
    pub r2: f64,
}

impl SallenKeyStage {
    /// Analytic stage response omega0^2 / (s^2 + (omega0/Q) s + omega0^2).
    pub fn transfer_function(&self) -> RationalTf {
        let w2 = self.omega0 * self.omega0;
        RationalTf::new(
            Polynomial::new(&[w2]),
            Polynomial::new(&[w2, self.omega0 / self.q_factor, 1.0]),
        )
        .expect("stage polynomials are well-formed")
    }
}

/// Equal-resistor unity-gain design: c1 = 4 Q^2 c2 sits exactly on the
/// realizability boundary, which forces r1 = r2 = 1/(2 Q omega0 c2).
pub fn design_sallen_key_stage(omega0: f64, q_factor: f64, c2: f64) -> SallenKeyStage {
    assert!(omega0 > 0.0 && q_factor > 0.0 && c2 > 0.0);
    let c1 = 4.0 * q_factor * q_factor * c2;
    let r = 1.0 / (2.0 * q_factor * omega0 * c2);
    SallenKeyStage {
        omega0,
        q_factor,
        c1,
        c2,
        r1: r,
        r2: r,
    }
}

/// Chain 1-8 stages behind ideal unity-gain buffers. Stage k occupies nodes
/// in -> (R) a<k> -> (R) b<k>, with C1 feeding back from the buffer output
/// and C2 to ground; the op-amp output drives the next stage directly.
/// The final output node is probed.
pub fn build_sallen_key_cascade(stages: &[SallenKeyStage]) -> Circuit {
    assert!(
        (1..=8).contains(&stages.len()),
        "cascade supports 1 to 8 stages"
    );
    let mut elements = vec![Element {
        name: "V1".into(),
        kind: ElementKind::VoltageSource {
            spec: SourceSpec {
                dc: 0.0,
                ac_mag: Some(1.0),
                sine: None,
            },
        },
        terminals: vec!["in".into(), "0".into()],
    }];

    let mut input = "in".to_string();
    let mut output = String::new();
    for (k, st) in stages.iter().enumerate() {
        let idx = k + 1;
        let a = format!("a{idx}");
        let b = format!("b{idx}");
        output = format!("out{idx}");
        elements.push(resistor(&format!("RA{idx}"), &input, &a, st.r1));
        elements.push(resistor(&format!("RB{idx}"), &a, &b, st.r2));
        elements.push(capacitor(&format!("CA{idx}"), &a, &output, st.c1));
        elements.push(capacitor(&format!("CB{idx}"), &b, "0", st.c2));
        // Unity-gain buffer: in+ = b, in- tied to the output.
        elements.push(Element {
            name: format!("E{idx}"),
            kind: ElementKind::IdealOpAmp,
            terminals: vec![b.clone(), output.clone(), output.clone()],
        });
        input = output.clone();
    }

    let omega_max = stages
        .iter()
        .map(|s| s.omega0)
        .fold(f64::MIN_POSITIVE, f64::max);
    let omega_min = stages.iter().map(|s| s.omega0).fold(f64::MAX, f64::min);
    let f_start = omega_min / TWO_PI / 100.0;
    let f_stop = omega_max / TWO_PI * 1000.0;

    Circuit {
        elements,
        analyses: vec![AnalysisDirective::AcSweep {
            points_per_decade: 40,
            f_start,
            f_stop,
        }],
        probes: vec![output],
    }
}

/// Product of the analytic stage responses.
pub fn cascade_transfer_function(stages: &[SallenKeyStage]) -> RationalTf {
    let mut tf = RationalTf::unit();
    for st in stages {
        tf = tf.cascade(&st.transfer_function());
    }
    tf
}

/// Replace every resistor with a memristor of identical small-signal
/// resistance: w0/d = (r_off - R)/(r_off - r_on) inverts M(w0) = R.
/// Names gain an `M` prefix so the element letter coding stays consistent.
pub fn substitute_memristors(
    circuit: &Circuit,
    params: &MemristorParams,
) -> Result<Circuit, SynthError> {
    let mut out = circuit.clone();
    for e in &mut out.elements {
        if let ElementKind::Resistor { ohms } = e.kind {
            if !(params.r_on..=params.r_off).contains(&ohms) {
                return Err(SynthError::OutOfRange {
                    name: e.name.clone(),
                    ohms,
                    r_on: params.r_on,
                    r_off: params.r_off,
                });
            }
            let w0_frac = (params.r_off - ohms) / (params.r_off - params.r_on);
            e.kind = ElementKind::Memristor {
                params: *params,
                w0_frac,
            };
            e.name = format!("M{}", e.name);
        }
    }
    Ok(out)
}

/// Parse a pole-table config: one "omega0 q" pair per line, `#` comments.
pub fn parse_pole_table(text: &str) -> Result<Vec<(f64, f64)>, SynthError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let omega0: f64 =
            it.next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| SynthError::BadPoleTable {
                    line: line_no,
                    reason: "expected omega0".into(),
                })?;
        let q: f64 =
            it.next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| SynthError::BadPoleTable {
                    line: line_no,
                    reason: "expected q".into(),
                })?;
        if it.next().is_some() {
            return Err(SynthError::BadPoleTable {
                line: line_no,
                reason: "trailing tokens".into(),
            });
        }
        if !(omega0 > 0.0 && q > 0.0) {
            return Err(SynthError::BadPoleTable {
                line: line_no,
                reason: "omega0 and q must be positive".into(),
            });
        }
        out.push((omega0, q));
    }
    Ok(out)
}

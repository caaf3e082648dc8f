//! SPICE-subset netlist: parse, serialize, validate.
//!
//! Grammar, one statement per line:
//!
//! ```text
//! * comment                      -- `*` starts a comment line
//! R/L/C<name> n+ n- <value>      -- values take SI suffixes p n u m k meg
//! V<name> n+ n- [DC <v>] [AC <mag>] [SIN(<amp> <freq>)]
//! M<name> n+ n- RON=<v> ROFF=<v> D=<v> MU=<v> P=<int> W0=<frac>
//! E<name> in+ in- out            -- ideal op-amp (nullor)
//! .ac dec <pts/decade> <fstart> <fstop>
//! .tran <dt> <tend>
//! .probe <node> [<node> ...]
//! .end                           -- optional
//! ```
//!
//! Node identifiers are arbitrary strings; "0" is ground.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::memristor::MemristorParams;

#[derive(Debug, Error, PartialEq)]
pub enum NetlistError {
    #[error("line {line}: syntax error: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: unknown element type '{leader}'")]
    UnknownElement { line: usize, leader: char },
    #[error("probe references node '{name}' that no element touches")]
    DanglingNode { name: String },
    #[error("ground node \"0\" is not referenced by any element")]
    MissingGround,
    #[error("duplicate element name '{name}'")]
    DuplicateName { name: String },
}

impl NetlistError {
    /// Syntax-class errors carry a line number and map to usage-level
    /// failures; structural errors are analysis-level diagnostics.
    pub fn is_syntax(&self) -> bool {
        matches!(
            self,
            NetlistError::Syntax { .. } | NetlistError::UnknownElement { .. }
        )
    }
}

/// Independent-source specification: DC level plus optional small-signal
/// magnitude and optional sine drive for transient runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub dc: f64,
    pub ac_mag: Option<f64>,
    pub sine: Option<SineSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineSpec {
    pub amplitude: f64,
    pub freq_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    Resistor {
        ohms: f64,
    },
    Inductor {
        henries: f64,
    },
    Capacitor {
        farads: f64,
    },
    VoltageSource {
        spec: SourceSpec,
    },
    Memristor {
        params: MemristorParams,
        w0_frac: f64,
    },
    IdealOpAmp,
}

/// A circuit element: name, kind, ordered terminals (2 for R/L/C/V/M,
/// 3 for the op-amp: in+, in-, out).
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub name: String,
    pub kind: ElementKind,
    pub terminals: Vec<String>,
}

impl Element {
    pub fn touches(&self, node: &str) -> bool {
        self.terminals.iter().any(|t| t == node)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisDirective {
    AcSweep {
        points_per_decade: usize,
        f_start: f64,
        f_stop: f64,
    },
    Transient {
        dt: f64,
        t_end: f64,
    },
}

/// Node-element description of a circuit plus its analysis directives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub elements: Vec<Element>,
    pub analyses: Vec<AnalysisDirective>,
    pub probes: Vec<String>,
}

impl Circuit {
    /// All node names touched by elements, sorted.
    pub fn nodes(&self) -> BTreeSet<String> {
        self.elements
            .iter()
            .flat_map(|e| e.terminals.iter().cloned())
            .collect()
    }

    pub fn find_element(&self, name: &str) -> Option<&Element> {
        self.elements
            .iter()
            .find(|e| e.name.eq_ignore_ascii_case(name))
    }

    pub fn ac_directive(&self) -> Option<(usize, f64, f64)> {
        self.analyses.iter().find_map(|a| match a {
            AnalysisDirective::AcSweep {
                points_per_decade,
                f_start,
                f_stop,
            } => Some((*points_per_decade, *f_start, *f_stop)),
            _ => None,
        })
    }

    pub fn transient_directive(&self) -> Option<(f64, f64)> {
        self.analyses.iter().find_map(|a| match a {
            AnalysisDirective::Transient { dt, t_end } => Some((*dt, *t_end)),
            _ => None,
        })
    }
}

/// Parse a numeric literal with optional SI suffix
/// (p = 1e-12, n = 1e-9, u = 1e-6, m = 1e-3, k = 1e3, meg = 1e6).
pub fn parse_value(token: &str) -> Option<f64> {
    if let Ok(v) = token.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let lower = token.to_ascii_lowercase();
    let (body, factor) = if let Some(stripped) = lower.strip_suffix("meg") {
        (stripped, 1e6)
    } else {
        let mut chars = lower.chars();
        let last = chars.next_back()?;
        let factor = match last {
            'p' => 1e-12,
            'n' => 1e-9,
            'u' => 1e-6,
            'm' => 1e-3,
            'k' => 1e3,
            _ => return None,
        };
        (chars.as_str(), factor)
    };
    let base: f64 = body.parse().ok()?;
    let v = base * factor;
    v.is_finite().then_some(v)
}

fn syntax(line: usize, reason: impl Into<String>) -> NetlistError {
    NetlistError::Syntax {
        line,
        reason: reason.into(),
    }
}

/// Parse netlist text into a validated Circuit.
pub fn parse(text: &str) -> Result<Circuit, NetlistError> {
    let mut circuit = Circuit::default();
    let mut seen_names: BTreeSet<String> = BTreeSet::new();

    'lines: for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('*') {
            continue;
        }
        // Split parentheses and commas off so SIN(1,50) and SIN(1 50) both
        // tokenize the same way.
        let spaced = line.replace(['(', ')', ','], " ");
        let tokens: Vec<&str> = spaced.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }

        if let Some(directive) = tokens[0].strip_prefix('.') {
            match directive.to_ascii_lowercase().as_str() {
                "ac" => {
                    if tokens.len() != 5 || !tokens[1].eq_ignore_ascii_case("dec") {
                        return Err(syntax(line_no, ".ac expects: .ac dec <n> <fstart> <fstop>"));
                    }
                    let ppd: usize = tokens[2]
                        .parse()
                        .map_err(|_| syntax(line_no, "points per decade must be an integer"))?;
                    let f_start = parse_value(tokens[3])
                        .ok_or_else(|| syntax(line_no, "bad fstart value"))?;
                    let f_stop =
                        parse_value(tokens[4]).ok_or_else(|| syntax(line_no, "bad fstop value"))?;
                    if ppd < 1 {
                        return Err(syntax(line_no, "points per decade must be >= 1"));
                    }
                    if !(f_start > 0.0 && f_start < f_stop) {
                        return Err(syntax(line_no, "need 0 < fstart < fstop"));
                    }
                    circuit.analyses.push(AnalysisDirective::AcSweep {
                        points_per_decade: ppd,
                        f_start,
                        f_stop,
                    });
                }
                "tran" => {
                    if tokens.len() != 3 {
                        return Err(syntax(line_no, ".tran expects: .tran <dt> <tend>"));
                    }
                    let dt =
                        parse_value(tokens[1]).ok_or_else(|| syntax(line_no, "bad dt value"))?;
                    let t_end =
                        parse_value(tokens[2]).ok_or_else(|| syntax(line_no, "bad tend value"))?;
                    if dt <= 0.0 {
                        return Err(syntax(line_no, "dt must be > 0"));
                    }
                    if t_end < dt {
                        return Err(syntax(line_no, "tend must be >= dt"));
                    }
                    circuit
                        .analyses
                        .push(AnalysisDirective::Transient { dt, t_end });
                }
                "probe" => {
                    if tokens.len() < 2 {
                        return Err(syntax(line_no, ".probe expects at least one node"));
                    }
                    for t in &tokens[1..] {
                        circuit.probes.push((*t).to_string());
                    }
                }
                "end" => break 'lines,
                other => {
                    return Err(syntax(line_no, format!("unknown directive '.{other}'")));
                }
            }
            continue;
        }

        let element = parse_element(line_no, &tokens)?;
        let key = element.name.to_ascii_lowercase();
        if !seen_names.insert(key) {
            return Err(NetlistError::DuplicateName {
                name: element.name.clone(),
            });
        }
        if element.terminals.iter().all(|t| t == &element.terminals[0]) {
            return Err(syntax(
                line_no,
                format!("element {} has all terminals on one node", element.name),
            ));
        }
        circuit.elements.push(element);
    }

    let nodes = circuit.nodes();
    if !nodes.contains("0") {
        return Err(NetlistError::MissingGround);
    }
    for probe in &circuit.probes {
        if !nodes.contains(probe) {
            return Err(NetlistError::DanglingNode {
                name: probe.clone(),
            });
        }
    }
    Ok(circuit)
}

fn parse_element(line_no: usize, tokens: &[&str]) -> Result<Element, NetlistError> {
    let name = tokens[0].to_string();
    let leader = name
        .chars()
        .next()
        .expect("token is non-empty")
        .to_ascii_uppercase();
    match leader {
        'R' | 'L' | 'C' => {
            if tokens.len() != 4 {
                return Err(syntax(
                    line_no,
                    format!("{leader} element expects: name n+ n- value"),
                ));
            }
            let value = parse_value(tokens[3])
                .ok_or_else(|| syntax(line_no, format!("bad value '{}'", tokens[3])))?;
            if value <= 0.0 {
                return Err(syntax(line_no, "element value must be positive"));
            }
            let kind = match leader {
                'R' => ElementKind::Resistor { ohms: value },
                'L' => ElementKind::Inductor { henries: value },
                _ => ElementKind::Capacitor { farads: value },
            };
            Ok(Element {
                name,
                kind,
                terminals: vec![tokens[1].to_string(), tokens[2].to_string()],
            })
        }
        'V' => {
            if tokens.len() < 3 {
                return Err(syntax(line_no, "V element expects: name n+ n- [spec]"));
            }
            let mut spec = SourceSpec {
                dc: 0.0,
                ac_mag: None,
                sine: None,
            };
            let mut rest = tokens[3..].iter().peekable();
            while let Some(&tok) = rest.next() {
                match tok.to_ascii_uppercase().as_str() {
                    "DC" => {
                        let v = rest
                            .next()
                            .and_then(|t| parse_value(t))
                            .ok_or_else(|| syntax(line_no, "DC expects a value"))?;
                        spec.dc = v;
                    }
                    "AC" => {
                        let v = rest
                            .next()
                            .and_then(|t| parse_value(t))
                            .ok_or_else(|| syntax(line_no, "AC expects a magnitude"))?;
                        spec.ac_mag = Some(v);
                    }
                    "SIN" => {
                        let amp = rest
                            .next()
                            .and_then(|t| parse_value(t))
                            .ok_or_else(|| syntax(line_no, "SIN expects amplitude, frequency"))?;
                        let freq = rest
                            .next()
                            .and_then(|t| parse_value(t))
                            .ok_or_else(|| syntax(line_no, "SIN expects amplitude, frequency"))?;
                        if freq <= 0.0 {
                            return Err(syntax(line_no, "SIN frequency must be > 0"));
                        }
                        spec.sine = Some(SineSpec {
                            amplitude: amp,
                            freq_hz: freq,
                        });
                    }
                    _ => {
                        // A bare number is shorthand for a DC level.
                        if let Some(v) = parse_value(tok) {
                            spec.dc = v;
                        } else {
                            return Err(syntax(
                                line_no,
                                format!("unexpected token '{tok}' in source spec"),
                            ));
                        }
                    }
                }
            }
            Ok(Element {
                name,
                kind: ElementKind::VoltageSource { spec },
                terminals: vec![tokens[1].to_string(), tokens[2].to_string()],
            })
        }
        'M' => {
            if tokens.len() < 3 {
                return Err(syntax(
                    line_no,
                    "M element expects: name n+ n- key=value...",
                ));
            }
            let mut ron = None;
            let mut roff = None;
            let mut d = None;
            let mut mu = None;
            let mut p = None;
            let mut w0 = None;
            for tok in &tokens[3..] {
                let (key, val) = tok
                    .split_once('=')
                    .ok_or_else(|| syntax(line_no, format!("expected key=value, got '{tok}'")))?;
                let slot = match key.to_ascii_uppercase().as_str() {
                    "RON" => &mut ron,
                    "ROFF" => &mut roff,
                    "D" => &mut d,
                    "MU" => &mut mu,
                    "P" => &mut p,
                    "W0" => &mut w0,
                    other => {
                        return Err(syntax(line_no, format!("unknown memristor key '{other}'")))
                    }
                };
                let v = parse_value(val)
                    .ok_or_else(|| syntax(line_no, format!("bad value in '{tok}'")))?;
                *slot = Some(v);
            }
            let missing = [
                ("RON", ron),
                ("ROFF", roff),
                ("D", d),
                ("MU", mu),
                ("P", p),
                ("W0", w0),
            ]
            .iter()
            .filter(|(_, v)| v.is_none())
            .map(|(k, _)| *k)
            .collect::<Vec<_>>();
            if !missing.is_empty() {
                return Err(syntax(
                    line_no,
                    format!("memristor missing keys: {}", missing.join(", ")),
                ));
            }
            let p_int = p.unwrap();
            if p_int < 1.0 || p_int.fract() != 0.0 || p_int > u32::MAX as f64 {
                return Err(syntax(line_no, "P must be a positive integer"));
            }
            let params = MemristorParams::new(
                ron.unwrap(),
                roff.unwrap(),
                d.unwrap(),
                mu.unwrap(),
                p_int as u32,
            )
            .map_err(|e| syntax(line_no, e.to_string()))?;
            let w0_frac = w0.unwrap();
            if !(0.0..=1.0).contains(&w0_frac) {
                return Err(syntax(line_no, "W0 must lie in [0, 1]"));
            }
            Ok(Element {
                name,
                kind: ElementKind::Memristor { params, w0_frac },
                terminals: vec![tokens[1].to_string(), tokens[2].to_string()],
            })
        }
        'E' => {
            if tokens.len() != 4 {
                return Err(syntax(line_no, "E element expects: name in+ in- out"));
            }
            Ok(Element {
                name,
                kind: ElementKind::IdealOpAmp,
                terminals: vec![
                    tokens[1].to_string(),
                    tokens[2].to_string(),
                    tokens[3].to_string(),
                ],
            })
        }
        other => Err(NetlistError::UnknownElement {
            line: line_no,
            leader: other,
        }),
    }
}

/// Canonical text form; `parse(serialize(c))` reproduces `c` exactly
/// (values are printed with shortest-round-trip formatting).
pub fn serialize(circuit: &Circuit) -> String {
    let mut out = String::new();
    for e in &circuit.elements {
        let terms = e.terminals.join(" ");
        match &e.kind {
            ElementKind::Resistor { ohms } => {
                fmt_line(&mut out, &e.name, &terms, &format!("{ohms}"))
            }
            ElementKind::Inductor { henries } => {
                fmt_line(&mut out, &e.name, &terms, &format!("{henries}"))
            }
            ElementKind::Capacitor { farads } => {
                fmt_line(&mut out, &e.name, &terms, &format!("{farads}"))
            }
            ElementKind::VoltageSource { spec } => {
                let mut s = format!("DC {}", spec.dc);
                if let Some(mag) = spec.ac_mag {
                    s.push_str(&format!(" AC {mag}"));
                }
                if let Some(sine) = spec.sine {
                    s.push_str(&format!(" SIN({} {})", sine.amplitude, sine.freq_hz));
                }
                fmt_line(&mut out, &e.name, &terms, &s);
            }
            ElementKind::Memristor { params, w0_frac } => {
                let s = format!(
                    "RON={} ROFF={} D={} MU={} P={} W0={}",
                    params.r_on, params.r_off, params.d, params.mu_v, params.window_p, w0_frac
                );
                fmt_line(&mut out, &e.name, &terms, &s);
            }
            ElementKind::IdealOpAmp => {
                out.push_str(&format!("{} {}\n", e.name, terms));
            }
        }
    }
    for a in &circuit.analyses {
        match a {
            AnalysisDirective::AcSweep {
                points_per_decade,
                f_start,
                f_stop,
            } => out.push_str(&format!(".ac dec {points_per_decade} {f_start} {f_stop}\n")),
            AnalysisDirective::Transient { dt, t_end } => {
                out.push_str(&format!(".tran {dt} {t_end}\n"))
            }
        }
    }
    if !circuit.probes.is_empty() {
        out.push_str(&format!(".probe {}\n", circuit.probes.join(" ")));
    }
    out
}

fn fmt_line(out: &mut String, name: &str, terms: &str, tail: &str) {
    out.push_str(&format!("{name} {terms} {tail}\n"));
}

/// Diagnostic severity: errors violate circuit invariants, warnings flag
/// conditions that merely limit what analyses can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    MissingGround,
    ShortedElement,
    DuplicateName,
    InvalidValue,
    DanglingProbe,
    NoExcitation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Re-derive every circuit invariant as data. Empty output means the
/// circuit is well-formed and carries at least one source.
pub fn validate(circuit: &Circuit) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let nodes = circuit.nodes();

    if !nodes.contains("0") {
        out.push(Diagnostic {
            severity: Severity::Error,
            kind: DiagnosticKind::MissingGround,
            message: "ground node \"0\" is not referenced by any element".into(),
        });
    }

    let mut seen = BTreeSet::new();
    for e in &circuit.elements {
        if !seen.insert(e.name.to_ascii_lowercase()) {
            out.push(Diagnostic {
                severity: Severity::Error,
                kind: DiagnosticKind::DuplicateName,
                message: format!("duplicate element name '{}'", e.name),
            });
        }
        if e.terminals.iter().all(|t| t == &e.terminals[0]) {
            out.push(Diagnostic {
                severity: Severity::Error,
                kind: DiagnosticKind::ShortedElement,
                message: format!(
                    "element '{}' has all terminals on node '{}'",
                    e.name, e.terminals[0]
                ),
            });
        }
        let bad_value = match &e.kind {
            ElementKind::Resistor { ohms } => !(ohms.is_finite() && *ohms > 0.0),
            ElementKind::Inductor { henries } => !(henries.is_finite() && *henries > 0.0),
            ElementKind::Capacitor { farads } => !(farads.is_finite() && *farads > 0.0),
            ElementKind::Memristor { params, w0_frac } => {
                params.check().is_err() || !(0.0..=1.0).contains(w0_frac)
            }
            _ => false,
        };
        if bad_value {
            out.push(Diagnostic {
                severity: Severity::Error,
                kind: DiagnosticKind::InvalidValue,
                message: format!("element '{}' has an out-of-range value", e.name),
            });
        }
    }

    for probe in &circuit.probes {
        if !nodes.contains(probe) {
            out.push(Diagnostic {
                severity: Severity::Error,
                kind: DiagnosticKind::DanglingProbe,
                message: format!("probe node '{probe}' is not touched by any element"),
            });
        }
    }

    for a in &circuit.analyses {
        let bad = match a {
            AnalysisDirective::AcSweep {
                points_per_decade,
                f_start,
                f_stop,
            } => *points_per_decade < 1 || !(*f_start > 0.0 && f_start < f_stop),
            AnalysisDirective::Transient { dt, t_end } => !(*dt > 0.0 && t_end >= dt),
        };
        if bad {
            out.push(Diagnostic {
                severity: Severity::Error,
                kind: DiagnosticKind::InvalidValue,
                message: format!("analysis directive has out-of-range parameters: {a:?}"),
            });
        }
    }

    let has_source = circuit
        .elements
        .iter()
        .any(|e| matches!(e.kind, ElementKind::VoltageSource { .. }));
    if !has_source {
        out.push(Diagnostic {
            severity: Severity::Warning,
            kind: DiagnosticKind::NoExcitation,
            message: "circuit has no voltage source; analyses will see zero excitation".into(),
        });
    }

    out
}

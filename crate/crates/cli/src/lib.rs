//! Command implementations for the workbench CLI.
//!
//! Each command reads its inputs, writes one plot-ready CSV, and prints a
//! deterministic run report to the supplied writer. Exit-code contract:
//! 0 success, 1 analysis/domain error, 2 usage/parse error.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use filterbench::memristor::{self, MemristorParams, MemristorState};
use filterbench::mna::{self, decade_grid};
use filterbench::netlist::{self, Circuit};
use filterbench::regression;
use filterbench::synth::{self, LadderSpec};
use filterbench::tf::{
    log_grid, overshoot, ErrorNorm, FrequencyResponse, RationalTf, TfError, HALF_POWER_DB,
};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable files, malformed input: exit 2.
    Usage(String),
    /// The analysis itself failed or found a domain error: exit 1.
    Analysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Analysis(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Analysis(m) => m,
        }
    }
}

pub type CmdResult = Result<(), CliError>;

/// FNV-1a 64-bit content digest, reported so reruns are verifiable.
pub fn digest(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn parse_netlist(text: &str) -> Result<Circuit, CliError> {
    netlist::parse(text).map_err(|e| {
        if e.is_syntax() {
            CliError::Usage(format!("netlist parse error: {e}"))
        } else {
            CliError::Analysis(format!("netlist error: {e}"))
        }
    })
}

fn csv_num(v: f64) -> String {
    format!("{v:.9e}")
}

/// Validate a netlist file; silent and exit 0 when clean.
pub fn cmd_check(path: &Path, report: &mut impl std::io::Write) -> CmdResult {
    let text = read_file(path)?;
    let circuit = parse_netlist(&text)?;
    let diags = netlist::validate(&circuit);
    for d in &diags {
        writeln!(report, "{d}").map_err(io_err)?;
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(CliError::Analysis(format!(
            "{} diagnostic(s) reported",
            diags.len()
        )))
    }
}

/// Frequency-sweep source selection for `cmd_ac`.
pub enum AcInput<'a> {
    File(&'a Path),
    BuiltinLadder,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SweepOverrides {
    pub f_start: Option<f64>,
    pub f_stop: Option<f64>,
    pub points_per_decade: Option<usize>,
}

impl SweepOverrides {
    fn resolve(&self, base: Option<(usize, f64, f64)>) -> Option<(usize, f64, f64)> {
        let (ppd0, f0, f1) = base.unwrap_or((0, 0.0, 0.0));
        let ppd = self.points_per_decade.unwrap_or(ppd0);
        let f_start = self.f_start.unwrap_or(f0);
        let f_stop = self.f_stop.unwrap_or(f1);
        (ppd >= 1 && f_start > 0.0 && f_stop > f_start).then_some((ppd, f_start, f_stop))
    }
}

/// -3 dB crossing of a sampled response, referenced to its lowest-frequency
/// magnitude, located by log-linear interpolation between samples.
fn sweep_cutoff_hz(fr: &FrequencyResponse) -> Option<f64> {
    let mags = fr.magnitude_db();
    let freqs: Vec<f64> = fr.freqs().collect();
    let target = mags[0] - HALF_POWER_DB;
    for k in 1..mags.len() {
        if mags[k] < target && mags[k - 1] >= target {
            let t = (target - mags[k - 1]) / (mags[k] - mags[k - 1]);
            let lf = freqs[k - 1].ln() + t * (freqs[k].ln() - freqs[k - 1].ln());
            return Some(lf.exp());
        }
    }
    None
}

fn interp_at(freqs: &[f64], values: &[f64], f: f64) -> f64 {
    let mut k = 1;
    while k < freqs.len() - 1 && freqs[k] < f {
        k += 1;
    }
    let t = (f.ln() - freqs[k - 1].ln()) / (freqs[k].ln() - freqs[k - 1].ln());
    values[k - 1] + t * (values[k] - values[k - 1])
}

fn ac_csv(sol: &mna::AcSolution, probes: &[String]) -> String {
    let mut csv = String::from("freq_hz");
    if probes.len() == 1 {
        csv.push_str(",mag_db,phase_deg");
    } else {
        for p in probes {
            let _ = write!(csv, ",mag_db_{p},phase_deg_{p}");
        }
    }
    csv.push('\n');
    for (k, f) in sol.freqs.iter().enumerate() {
        let _ = write!(csv, "{}", csv_num(*f));
        for p in probes {
            let fr = &sol.responses[p];
            let _ = write!(
                csv,
                ",{},{}",
                csv_num(fr.magnitude_db()[k]),
                csv_num(fr.phase_deg()[k])
            );
        }
        csv.push('\n');
    }
    csv
}

fn report_sweep_summary(
    report: &mut impl std::io::Write,
    sol: &mna::AcSolution,
    probes: &[String],
) -> CmdResult {
    for p in probes {
        let fr = &sol.responses[p];
        let freqs: Vec<f64> = fr.freqs().collect();
        let mags = fr.magnitude_db();
        let peak = mags
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        writeln!(report, "probe {p} peak_hz: {:.6e}", freqs[peak.0]).map_err(io_err)?;
        writeln!(report, "probe {p} peak_db: {:.6}", peak.1).map_err(io_err)?;
        match sweep_cutoff_hz(fr) {
            Some(fc) => {
                writeln!(report, "probe {p} cutoff_hz: {fc:.6e}").map_err(io_err)?;
                let ph = interp_at(&freqs, fr.phase_deg_unwrapped(), fc);
                writeln!(report, "probe {p} phase_at_cutoff_deg: {ph:.3}").map_err(io_err)?;
            }
            None => writeln!(report, "probe {p} cutoff_hz: not-found").map_err(io_err)?,
        }
    }
    Ok(())
}

pub fn cmd_ac(
    input: AcInput,
    out_csv: &Path,
    overrides: &SweepOverrides,
    report: &mut impl std::io::Write,
) -> CmdResult {
    let (circuit, echo, text) = match input {
        AcInput::File(path) => {
            let text = read_file(path)?;
            let c = parse_netlist(&text)?;
            (c, format!("ac {}", path.display()), text)
        }
        AcInput::BuiltinLadder => {
            let c = synth::build_gaussian_ladder(&LadderSpec::default());
            let text = netlist::serialize(&c);
            (c, "ac --builtin ladder".to_string(), text)
        }
    };
    if circuit.probes.is_empty() {
        return Err(CliError::Analysis(
            "netlist has no .probe directive; nothing to sweep".into(),
        ));
    }
    let sweep = overrides
        .resolve(circuit.ac_directive())
        .ok_or_else(|| CliError::Analysis("netlist has no usable .ac directive".into()))?;
    let freqs = decade_grid(sweep.1, sweep.2, sweep.0);
    let sol = mna::ac_sweep(&circuit, &freqs).map_err(|e| CliError::Analysis(e.to_string()))?;

    write_file(out_csv, &ac_csv(&sol, &circuit.probes))?;

    writeln!(report, "command: {echo}").map_err(io_err)?;
    writeln!(report, "input digest: {}", digest(text.as_bytes())).map_err(io_err)?;
    writeln!(
        report,
        "sweep: {} pts/decade over [{:.6e}, {:.6e}] Hz ({} points)",
        sweep.0,
        sweep.1,
        sweep.2,
        freqs.len()
    )
    .map_err(io_err)?;
    report_sweep_summary(report, &sol, &circuit.probes)?;
    writeln!(
        report,
        "kcl_rel_residual: {:.3e}",
        mna::ac_kcl_residual(&circuit, &sol)
    )
    .map_err(io_err)?;
    writeln!(report, "csv: {}", out_csv.display()).map_err(io_err)?;
    writeln!(report, "warnings: none").map_err(io_err)?;
    Ok(())
}

pub fn cmd_tran(
    path: &Path,
    out_csv: &Path,
    integrator: mna::Integrator,
    report: &mut impl std::io::Write,
) -> CmdResult {
    let text = read_file(path)?;
    let circuit = parse_netlist(&text)?;
    let (dt, t_end) = circuit
        .transient_directive()
        .ok_or_else(|| CliError::Analysis("netlist has no .tran directive".into()))?;
    let sol = mna::transient_with(&circuit, dt, t_end, integrator)
        .map_err(|e| CliError::Analysis(e.to_string()))?;

    let mut csv = String::from("time_s");
    for p in sol.probes.keys() {
        let _ = write!(csv, ",v_{p}");
    }
    for m in sol.memristor_fraction.keys() {
        let _ = write!(csv, ",wfrac_{m}");
    }
    csv.push('\n');
    for (k, t) in sol.times.iter().enumerate() {
        let _ = write!(csv, "{}", csv_num(*t));
        for w in sol.probes.values() {
            let _ = write!(csv, ",{}", csv_num(w.samples[k]));
        }
        for traj in sol.memristor_fraction.values() {
            let _ = write!(csv, ",{}", csv_num(traj[k]));
        }
        csv.push('\n');
    }
    write_file(out_csv, &csv)?;

    writeln!(report, "command: tran {}", path.display()).map_err(io_err)?;
    writeln!(report, "input digest: {}", digest(text.as_bytes())).map_err(io_err)?;
    writeln!(
        report,
        "steps: {} (dt = {dt:.6e} s, t_end = {t_end:.6e} s)",
        sol.times.len()
    )
    .map_err(io_err)?;
    writeln!(report, "kcl_rel_residual: {:.3e}", sol.max_kcl_rel_residual).map_err(io_err)?;
    writeln!(report, "csv: {}", out_csv.display()).map_err(io_err)?;
    writeln!(report, "warnings: none").map_err(io_err)?;
    Ok(())
}

pub struct HysteresisArgs {
    pub amplitude: f64,
    pub freqs: Vec<f64>,
    pub cycles: usize,
    pub steps_per_cycle: usize,
    pub params: MemristorParams,
    pub w0_frac: f64,
}

pub fn cmd_hysteresis(
    args: &HysteresisArgs,
    out_csv: &Path,
    report: &mut impl std::io::Write,
) -> CmdResult {
    if !(args.amplitude.is_finite() && args.amplitude > 0.0) {
        return Err(CliError::Usage("amplitude must be > 0".into()));
    }
    if args.freqs.is_empty() || args.freqs.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
        return Err(CliError::Usage("frequencies must be positive".into()));
    }
    if args.cycles < 1 || args.steps_per_cycle < 100 {
        return Err(CliError::Usage(
            "need cycles >= 1 and steps-per-cycle >= 100".into(),
        ));
    }
    args.params
        .check()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if !(0.0..=1.0).contains(&args.w0_frac) {
        return Err(CliError::Usage("w0 must lie in [0, 1]".into()));
    }

    let freq_list = args
        .freqs
        .iter()
        .map(|f| f.to_string())
        .collect::<Vec<_>>()
        .join(",");
    writeln!(
        report,
        "command: hysteresis --amplitude {} --freq {} --cycles {} --steps-per-cycle {}",
        args.amplitude, freq_list, args.cycles, args.steps_per_cycle
    )
    .map_err(io_err)?;

    let mut csv = String::from("t_s,v_V,i_A\n");
    let mut m_min = f64::MAX;
    let mut m_max = f64::MIN;
    for &f in &args.freqs {
        let initial = MemristorState::from_fraction(&args.params, args.w0_frac);
        let iv = memristor::simulate_iv(
            &args.params,
            args.amplitude,
            f,
            args.cycles,
            args.steps_per_cycle,
            initial,
        );
        // Track memristance bounds by replaying the state trajectory.
        let mut state = initial;
        let dt = 1.0 / (f * args.steps_per_cycle as f64);
        for (k, s) in iv.iter().enumerate() {
            let m = memristor::memristance(&args.params, &state);
            m_min = m_min.min(m);
            m_max = m_max.max(m);
            if k < iv.len() - 1 {
                state = memristor::step_state(&args.params, &state, s.i, dt);
            }
        }
        for s in &iv {
            let _ = writeln!(csv, "{},{},{}", csv_num(s.t), csv_num(s.v), csv_num(s.i));
        }
        let last_cycle = &iv[iv.len() - args.steps_per_cycle - 1..];
        let area =
            memristor::loop_area(last_cycle).map_err(|e| CliError::Analysis(e.to_string()))?;
        writeln!(report, "loop_area at {f} Hz: {area:.6e}").map_err(io_err)?;
    }
    write_file(out_csv, &csv)?;

    writeln!(report, "memristance_min_ohm: {m_min:.6}").map_err(io_err)?;
    writeln!(report, "memristance_max_ohm: {m_max:.6}").map_err(io_err)?;
    writeln!(
        report,
        "memristance_within_bounds: {}",
        m_min >= args.params.r_on && m_max <= args.params.r_off
    )
    .map_err(io_err)?;
    writeln!(report, "csv: {}", out_csv.display()).map_err(io_err)?;
    writeln!(report, "warnings: none").map_err(io_err)?;
    Ok(())
}

/// Transfer-function source for `cmd_tf`.
pub enum TfInput {
    Coeffs {
        num: Vec<f64>,
        den: Vec<f64>,
    },
    /// The built-in 4th-order Gaussian approximant.
    BuiltinGaussian4,
}

pub fn cmd_tf(
    input: &TfInput,
    out_csv: &Path,
    overrides: &SweepOverrides,
    report: &mut impl std::io::Write,
) -> CmdResult {
    let (tf, echo, builtin) = match input {
        TfInput::Coeffs { num, den } => {
            let tf = RationalTf::from_coeffs(num, den)
                .map_err(|e| CliError::Usage(format!("bad coefficients: {e}")))?;
            (tf, format!("tf --num {num:?} --den {den:?}"), false)
        }
        TfInput::BuiltinGaussian4 => (
            RationalTf::fourth_order_gaussian(),
            "tf --builtin gaussian4".to_string(),
            true,
        ),
    };

    let (ppd, f_start, f_stop) = overrides
        .resolve(Some((40, 1e-3, 1e3)))
        .ok_or_else(|| CliError::Usage("invalid sweep range".into()))?;
    let freqs = decade_grid(f_start, f_stop, ppd);
    let fr = tf
        .freq_response(&freqs)
        .map_err(|e| CliError::Analysis(e.to_string()))?;

    let mut csv = String::from("freq_hz,mag_db,phase_deg\n");
    for (k, (f, _)) in fr.samples().iter().enumerate() {
        let _ = writeln!(
            csv,
            "{},{},{}",
            csv_num(*f),
            csv_num(fr.magnitude_db()[k]),
            csv_num(fr.phase_deg()[k])
        );
    }
    write_file(out_csv, &csv)?;

    writeln!(report, "command: {echo}").map_err(io_err)?;
    let digest_src = format!(
        "{:?}|{:?}",
        tf.numerator().coeffs(),
        tf.denominator().coeffs()
    );
    writeln!(report, "input digest: {}", digest(digest_src.as_bytes())).map_err(io_err)?;

    let dc = tf.dc_gain().map_err(|e| match e {
        TfError::DcPole => CliError::Analysis("DcPole: denominator vanishes at s = 0".into()),
        other => CliError::Analysis(other.to_string()),
    })?;
    writeln!(report, "dc_gain: {dc:.6}").map_err(io_err)?;

    let fc = match tf.half_power_cutoff() {
        Ok(fc) => fc,
        Err(TfError::NoCutoffFound { .. }) => {
            writeln!(report, "cutoff_hz: not-found (NoCutoffFound)").map_err(io_err)?;
            return Err(CliError::Analysis(
                "NoCutoffFound: response never drops 3 dB below DC in the search interval".into(),
            ));
        }
        Err(e) => return Err(CliError::Analysis(e.to_string())),
    };
    writeln!(report, "cutoff_hz: {fc:.6}").map_err(io_err)?;
    let phase = tf
        .phase_at(fc)
        .map_err(|e| CliError::Analysis(e.to_string()))?;
    writeln!(report, "phase_at_cutoff_deg: {phase:.3}").map_err(io_err)?;

    let t_end = 10.0 / fc;
    let sr = tf
        .step_response(t_end, t_end / 50_000.0)
        .map_err(|e| CliError::Analysis(e.to_string()))?;
    let os = overshoot(&sr.waveform, dc);
    writeln!(report, "step_overshoot_pct: {os:.3}").map_err(io_err)?;
    if sr.unstable {
        writeln!(report, "step_response: UNSTABLE (diverging samples)").map_err(io_err)?;
    }

    let sigma_grid = log_grid(0.01, 10.0, 200);
    let (sigma, err) = tf
        .best_gaussian_sigma(&sigma_grid, ErrorNorm::Linf)
        .map_err(|e| CliError::Analysis(e.to_string()))?;
    writeln!(report, "best_gaussian_sigma_s: {sigma:.6}").map_err(io_err)?;
    writeln!(report, "gaussian_linf_error: {err:.6}").map_err(io_err)?;

    if builtin {
        writeln!(
            report,
            "DISCREPANCY: this filter is commonly quoted with cutoff 4.78 Hz and phase -135 deg; \
             the coefficients above yield cutoff {fc:.4} Hz and phase {phase:.1} deg, so the \
             quoted figures are reported here without being asserted."
        )
        .map_err(io_err)?;
    }
    writeln!(report, "csv: {}", out_csv.display()).map_err(io_err)?;
    writeln!(report, "warnings: none").map_err(io_err)?;
    Ok(())
}

pub struct SallenKeyArgs {
    pub pole_table: String,
    pub pole_table_label: String,
    pub c2: f64,
    pub memristor: Option<MemristorParams>,
}

pub fn cmd_sallen_key(
    args: &SallenKeyArgs,
    out_csv: &Path,
    overrides: &SweepOverrides,
    report: &mut impl std::io::Write,
) -> CmdResult {
    let pairs =
        synth::parse_pole_table(&args.pole_table).map_err(|e| CliError::Usage(e.to_string()))?;
    if pairs.is_empty() || pairs.len() > 4 {
        return Err(CliError::Usage(format!(
            "pole table must hold 1 to 4 stages, found {}",
            pairs.len()
        )));
    }
    if !(args.c2.is_finite() && args.c2 > 0.0) {
        return Err(CliError::Usage("c2 must be > 0".into()));
    }

    let stages: Vec<_> = pairs
        .iter()
        .map(|&(omega0, q)| synth::design_sallen_key_stage(omega0, q, args.c2))
        .collect();
    let mut circuit = synth::build_sallen_key_cascade(&stages);
    if let Some(params) = &args.memristor {
        circuit = synth::substitute_memristors(&circuit, params)
            .map_err(|e| CliError::Analysis(e.to_string()))?;
    }

    let sweep = overrides
        .resolve(circuit.ac_directive())
        .ok_or_else(|| CliError::Usage("invalid sweep range".into()))?;
    let freqs = decade_grid(sweep.1, sweep.2, sweep.0);
    let sol = mna::ac_sweep(&circuit, &freqs).map_err(|e| CliError::Analysis(e.to_string()))?;
    write_file(out_csv, &ac_csv(&sol, &circuit.probes))?;

    writeln!(
        report,
        "command: sallen-key --poles {}",
        args.pole_table_label
    )
    .map_err(io_err)?;
    writeln!(
        report,
        "input digest: {}",
        digest(args.pole_table.as_bytes())
    )
    .map_err(io_err)?;
    writeln!(report, "stages: {}", stages.len()).map_err(io_err)?;
    for (k, st) in stages.iter().enumerate() {
        writeln!(
            report,
            "stage {}: omega0 {:.6} rad/s, q {:.6}, r {:.3} ohm, c1 {:.3e} F, c2 {:.3e} F",
            k + 1,
            st.omega0,
            st.q_factor,
            st.r1,
            st.c1,
            st.c2
        )
        .map_err(io_err)?;
    }
    writeln!(
        report,
        "memristor_substitution: {}",
        args.memristor.is_some()
    )
    .map_err(io_err)?;
    report_sweep_summary(report, &sol, &circuit.probes)?;

    // Asymptotic slope over the top decade of the sweep.
    let probe = &circuit.probes[0];
    let fr = &sol.responses[probe];
    let fs: Vec<f64> = fr.freqs().collect();
    let last = *fs.last().unwrap();
    let db_top = *fr.magnitude_db().last().unwrap();
    let db_dec = interp_at(&fs, fr.magnitude_db(), last / 10.0);
    writeln!(
        report,
        "top_decade_slope_db_per_decade: {:.3}",
        db_top - db_dec
    )
    .map_err(io_err)?;
    writeln!(report, "csv: {}", out_csv.display()).map_err(io_err)?;
    writeln!(report, "warnings: none").map_err(io_err)?;
    Ok(())
}

pub fn cmd_fit(
    csv_path: Option<&Path>,
    export: Option<&Path>,
    report: &mut impl std::io::Write,
) -> CmdResult {
    let (points, echo, source) = match csv_path {
        Some(path) => {
            let text = read_file(path)?;
            let points = parse_fit_csv(&text)?;
            (points, format!("fit --csv {}", path.display()), text)
        }
        None => {
            let points = regression::reference_dataset();
            let text = regression::dataset_csv();
            (points, "fit (embedded dataset)".to_string(), text)
        }
    };

    if let Some(path) = export {
        write_file(path, &regression::dataset_csv())?;
    }

    writeln!(report, "command: {echo}").map_err(io_err)?;
    writeln!(report, "input digest: {}", digest(source.as_bytes())).map_err(io_err)?;

    let fit = regression::log_fit(&points).map_err(|e| CliError::Analysis(e.to_string()))?;
    writeln!(report, "model: mag_db = slope * ln(freq_khz) + intercept").map_err(io_err)?;
    writeln!(report, "slope: {:.4}", fit.slope).map_err(io_err)?;
    writeln!(report, "intercept: {:.4}", fit.intercept).map_err(io_err)?;
    writeln!(report, "r_squared: {:.5}", fit.r_squared).map_err(io_err)?;
    writeln!(report, "rss_db2: {:.4}", fit.rss).map_err(io_err)?;
    writeln!(
        report,
        "residuals (freq_khz, mag_db, fitted_db, residual_db):"
    )
    .map_err(io_err)?;
    for p in &points {
        let fitted = regression::fit_predict(&fit, p.f_khz);
        writeln!(
            report,
            "  {:>10} {:>9.3} {:>9.3} {:>8.3}",
            p.f_khz,
            p.mag_db,
            fitted,
            p.mag_db - fitted
        )
        .map_err(io_err)?;
    }
    writeln!(report, "warnings: none").map_err(io_err)?;
    Ok(())
}

fn parse_fit_csv(text: &str) -> Result<Vec<regression::ResponsePoint>, CliError> {
    let mut lines = text.lines();
    match lines.next().map(str::trim) {
        Some("freq_khz,mag_db") => {}
        other => {
            return Err(CliError::Usage(format!(
                "expected header 'freq_khz,mag_db', found {other:?}"
            )))
        }
    }
    let mut points = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let (f, m) = match (cols.next(), cols.next(), cols.next()) {
            (Some(f), Some(m), None) => (f, m),
            _ => {
                return Err(CliError::Usage(format!(
                    "csv row {}: expected two columns",
                    idx + 2
                )))
            }
        };
        let f_khz: f64 = f
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("csv row {}: bad frequency '{f}'", idx + 2)))?;
        let mag_db: f64 = m
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("csv row {}: bad magnitude '{m}'", idx + 2)))?;
        if !(f_khz.is_finite() && f_khz > 0.0) {
            return Err(CliError::Usage(format!(
                "csv row {}: frequency must be positive",
                idx + 2
            )));
        }
        points.push(regression::ResponsePoint { f_khz, mag_db });
    }
    Ok(points)
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Usage(format!("write failed: {e}"))
}

//! Noise sweeps, single-point certification and CSV output.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::bell::{chsh_expression, evaluate_bell};
use crate::error::{Error, Result};
use crate::guessing::{assemble, best_fixed_settings, certify, CertifiedResult, Mode, ProgramSpec};
use crate::quantum::NoiseKind;

/// Column header of the sweep CSV.
pub const CSV_HEADER: &str = "noise,param,case,chsh,g_upper,hmin_bits,gap,status,settings";
/// Case-1 rates below this leave the ratio cells empty.
pub const RATIO_FLOOR: f64 = 1e-6;

/// Parameter grid `start:step:end`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub step: f64,
    pub end: f64,
}

impl Default for Grid {
    /// 41 points from 0 to 1.
    fn default() -> Self {
        Grid {
            start: 0.0,
            step: 0.025,
            end: 1.0,
        }
    }
}

impl Grid {
    pub fn new(start: f64, step: f64, end: f64) -> Result<Self> {
        for (name, value) in [("grid start", start), ("grid end", end)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ParameterOutOfRange { name, value });
            }
        }
        if !(step > 0.0) || end < start {
            return Err(Error::InvalidProblem(format!(
                "grid {start}:{step}:{end} needs step > 0 and start ≤ end"
            )));
        }
        Ok(Grid { start, step, end })
    }

    /// Grid points, computed as `start + k step` and snapped to `end` when
    /// within rounding of it.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.end - self.start) / self.step + 1e-9).floor() as usize;
        let mut out: Vec<f64> = (0..=count)
            .map(|k| self.start + k as f64 * self.step)
            .collect();
        if let Some(last) = out.last_mut() {
            if (*last - self.end).abs() < 1e-9 {
                *last = self.end;
            }
        }
        out
    }
}

impl std::str::FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidProblem(format!("grid `{s}` is not start:step:end"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        Grid::new(nums[0], nums[1], nums[2])
    }
}

/// Settings pair used for the key, or all settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SettingsChoice {
    Fixed(usize, usize),
    All,
}

impl std::fmt::Display for SettingsChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SettingsChoice::Fixed(x, y) => write!(f, "({x},{y})"),
            SettingsChoice::All => f.write_str("all"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub noise: NoiseKind,
    pub param: f64,
    pub case: Mode,
    pub chsh: f64,
    pub guessing_upper: f64,
    pub hmin_bits: f64,
    pub gap: f64,
    pub status: String,
    pub settings: SettingsChoice,
}

impl SweepRow {
    fn failed(noise: NoiseKind, param: f64, case: Mode, chsh: f64, err: &Error) -> Self {
        let status = match err {
            Error::Solver { status, .. } => format!("failed_{status}"),
            _ => "failed".to_string(),
        };
        SweepRow {
            noise,
            param,
            case,
            chsh,
            guessing_upper: f64::NAN,
            hmin_bits: f64::NAN,
            gap: f64::NAN,
            status,
            settings: if case.fixed_settings() {
                SettingsChoice::Fixed(0, 0)
            } else {
                SettingsChoice::All
            },
        }
    }

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.noise,
            fmt12(self.param),
            self.case.case_id(),
            fmt12(self.chsh),
            fmt12(self.guessing_upper),
            fmt12(self.hmin_bits),
            fmt12(self.gap),
            self.status,
            match self.settings {
                SettingsChoice::Fixed(..) => format!("\"{}\"", self.settings),
                SettingsChoice::All => self.settings.to_string(),
            }
        )
    }
}

/// Twelve significant digits; empty for non-finite values.
pub fn fmt12(v: f64) -> String {
    if !v.is_finite() {
        return String::new();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.11e}")
    }
}

/// A certified point with its row.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub row: SweepRow,
    pub spec: ProgramSpec,
    pub result: CertifiedResult,
}

/// Certifies one noise level. Cases 1 and 2 use `settings` if given and the
/// best of the four pairs otherwise; case 3 always uses all settings.
pub fn certify_point(
    noise: NoiseKind,
    param: f64,
    case: Mode,
    settings: Option<(usize, usize)>,
) -> Result<PointResult> {
    if !(0.0..=1.0).contains(&param) {
        return Err(Error::ParameterOutOfRange {
            name: "param",
            value: param,
        });
    }
    let observed = noise.behavior(param)?;
    let chsh = evaluate_bell(&chsh_expression(), &observed)?;
    let (spec, result) = match (case.fixed_settings(), settings) {
        (true, Some(xy)) => {
            let spec = ProgramSpec::new(case, observed, Some(xy))?;
            let r = certify(&spec)?;
            (spec, r)
        }
        (true, None) => {
            let (xy, r) = best_fixed_settings(case, &observed)?;
            (ProgramSpec::new(case, observed, Some(xy))?, r)
        }
        (false, _) => {
            let spec = ProgramSpec::new(case, observed, None)?;
            let r = certify(&spec)?;
            (spec, r)
        }
    };
    let settings = match spec.fixed_settings() {
        Some((x, y)) => SettingsChoice::Fixed(x, y),
        None => SettingsChoice::All,
    };
    let row = SweepRow {
        noise,
        param,
        case,
        chsh,
        guessing_upper: result.guessing_upper,
        hmin_bits: result.hmin_bits,
        gap: result.gap,
        status: result.status.to_string(),
        settings,
    };
    Ok(PointResult { row, spec, result })
}

/// Certifies every `(param, case)` pair on up to `jobs` threads and returns
/// the outcomes sorted by `(param, case)`.
pub fn sweep_points(
    noise: NoiseKind,
    grid: &Grid,
    cases: &[Mode],
    jobs: usize,
) -> Vec<(f64, Mode, Result<PointResult>)> {
    let mut tasks: Vec<(f64, Mode)> = Vec::new();
    for p in grid.points() {
        for &c in cases {
            tasks.push((p, c));
        }
    }
    // Case 3 is by far the slowest; start those first.
    let mut order: Vec<usize> = (0..tasks.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(tasks[i].1.case_id()));
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(tasks.len()));
    let work = || loop {
        let k = next.fetch_add(1, Ordering::Relaxed);
        let Some(&i) = order.get(k) else {
            break;
        };
        let (param, case) = tasks[i];
        let out = certify_point(noise, param, case, None);
        done.lock()
            .expect("no panics while holding the lock")
            .push((param, case, out));
    };
    std::thread::scope(|s| {
        for _ in 1..jobs.max(1).min(tasks.len().max(1)) {
            s.spawn(work);
        }
        work();
    });
    let mut done = done.into_inner().expect("no panics while holding the lock");
    done.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    done
}

/// [`sweep_points`] reduced to CSV rows. Failures become rows with a
/// `failed` status.
pub fn run_sweep(noise: NoiseKind, grid: &Grid, cases: &[Mode], jobs: usize) -> Vec<SweepRow> {
    sweep_points(noise, grid, cases, jobs)
        .into_iter()
        .map(|(param, case, out)| match out {
            Ok(pr) => pr.row,
            Err(e) => {
                let chsh = noise
                    .behavior(param)
                    .and_then(|b| evaluate_bell(&chsh_expression(), &b))
                    .unwrap_or(f64::NAN);
                SweepRow::failed(noise, param, case, chsh, &e)
            }
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv_line());
        s.push('\n');
    }
    s
}

/// `hmin(case) / hmin(case 1)`, or `None` below [`RATIO_FLOOR`] or when a
/// row is missing.
pub fn rate_ratio(rows: &[SweepRow], param: f64, case: Mode) -> Option<f64> {
    let find = |m: Mode| {
        rows.iter()
            .find(|r| r.param == param && r.case == m && r.hmin_bits.is_finite())
    };
    let base = find(Mode::ChshOnly)?.hmin_bits;
    let other = find(case)?.hmin_bits;
    (base >= RATIO_FLOOR).then(|| other / base)
}

/// Ratios of the case 2 and case 3 curves to the case 1 curve.
pub fn ratio_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("noise,param,ratio_2_1,ratio_3_1\n");
    let mut params: Vec<f64> = rows.iter().map(|r| r.param).collect();
    params.dedup();
    let Some(noise) = rows.first().map(|r| r.noise) else {
        return s;
    };
    for p in params {
        let cell = |m| rate_ratio(rows, p, m).map(fmt12).unwrap_or_default();
        writeln!(
            s,
            "{noise},{},{},{}",
            fmt12(p),
            cell(Mode::FixedFull),
            cell(Mode::AllFull)
        )
        .unwrap();
    }
    s
}

/// Side-by-side case-2-over-case-1 ratios of a white-noise and a dephasing
/// sweep on the parameters both contain.
pub fn ratio_comparison_csv(white: &[SweepRow], dephasing: &[SweepRow]) -> String {
    let mut s = String::from("param,white_ratio_2_1,dephasing_ratio_2_1,dephasing_exceeds\n");
    let mut params: Vec<f64> = white.iter().map(|r| r.param).collect();
    params.dedup();
    for p in params {
        let (Some(w), Some(d)) = (
            rate_ratio(white, p, Mode::FixedFull),
            rate_ratio(dephasing, p, Mode::FixedFull),
        ) else {
            continue;
        };
        writeln!(s, "{},{},{},{}", fmt12(p), fmt12(w), fmt12(d), d > w).unwrap();
    }
    s
}

/// Assembles the program of one point and writes it in SDPA format.
/// Returns the internal objective for comparison with external solvers.
pub fn export_point(
    noise: NoiseKind,
    param: f64,
    case: Mode,
    settings: Option<(usize, usize)>,
    path: &std::path::Path,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&param) {
        return Err(Error::ParameterOutOfRange {
            name: "param",
            value: param,
        });
    }
    let observed = noise.behavior(param)?;
    let settings = if case.fixed_settings() {
        Some(settings.unwrap_or((0, 0)))
    } else {
        None
    };
    let spec = ProgramSpec::new(case, observed, settings)?;
    let program = assemble(&spec)?;
    std::fs::write(path, crate::sdp::sdpa::export_sdpa(&program.problem))?;
    Ok(certify(&spec)?.primal_objective)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: Grid = "0:0.025:1".parse().unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 41);
        assert_eq!(pts[40], 1.0);
        assert_eq!(Grid::default().points(), pts);
        assert_eq!("0.5:0.1:0.5".parse::<Grid>().unwrap().points(), vec![0.5]);
        assert!("0:0:1".parse::<Grid>().is_err());
        assert!("0:0.1:1.2".parse::<Grid>().is_err());
        assert!("0:0.1".parse::<Grid>().is_err());
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(0.5), "0.500000000000");
        assert_eq!(fmt12(2.0 * 2f64.sqrt()), "2.82842712475");
        assert_eq!(fmt12(1.5e-9), "1.50000000000e-9");
        assert_eq!(fmt12(f64::NAN), "");
    }

    #[test]
    fn local_points_give_zero_rate() {
        let rows = run_sweep(
            NoiseKind::White,
            &"0:0.5:0.5".parse().unwrap(),
            &[Mode::ChshOnly],
            2,
        );
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert!(r.hmin_bits.abs() < 1e-4, "{r:?}");
            assert!((r.hmin_bits + r.guessing_upper.log2()).abs() < 1e-12);
        }
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn parameter_domain() {
        assert!(matches!(
            certify_point(NoiseKind::White, -0.1, Mode::FixedFull, None),
            Err(Error::ParameterOutOfRange { .. })
        ));
    }

    #[test]
    fn ratio_cells_empty_below_floor() {
        let row = |case, h: f64| SweepRow {
            noise: NoiseKind::White,
            param: 0.5,
            case,
            chsh: 0.0,
            guessing_upper: (-h).exp2(),
            hmin_bits: h,
            gap: 0.0,
            status: "optimal".into(),
            settings: SettingsChoice::All,
        };
        let rows = vec![row(Mode::ChshOnly, 0.0), row(Mode::FixedFull, 0.1)];
        assert_eq!(rate_ratio(&rows, 0.5, Mode::FixedFull), None);
        assert_eq!(
            ratio_csv(&rows).lines().nth(1),
            Some("white,0.500000000000,,")
        );
        let rows = vec![row(Mode::ChshOnly, 0.2), row(Mode::FixedFull, 0.3)];
        assert!((rate_ratio(&rows, 0.5, Mode::FixedFull).unwrap() - 1.5).abs() < 1e-12);
    }
}

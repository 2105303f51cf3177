//! Sampled matrix-valued inputs on a uniform grid, their norms, and builders.
//!
//! Channel 0 is the drift and is always the identity; it is never stored.

use std::f64::consts::FRAC_PI_2;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dendriform::polynomial::matrix_from_json;
use crate::error::{Error, Result};
use crate::tree::Alphabet;

/// Largest channel index accepted from a CSV file.
pub const MAX_CSV_CHANNELS: usize = 64;

/// Uniform grid `t_k = k T / N`, `k = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    horizon: f64,
    panels: usize,
}

impl Grid {
    pub fn new(horizon: f64, panels: usize) -> Result<Self> {
        if panels == 0 {
            return Err(Error::Signal("grid needs at least one panel".into()));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Signal(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        Ok(Grid { horizon, panels })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes(&self) -> usize {
        self.panels + 1
    }

    pub fn h(&self) -> f64 {
        self.horizon / self.panels as f64
    }

    pub fn t(&self, k: usize) -> f64 {
        self.horizon * k as f64 / self.panels as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes()).map(|k| self.t(k))
    }
}

/// Composite trapezoid rule over the whole grid.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => h * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// Maximum absolute column sum.
pub fn matrix_norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSignal {
    grid: Grid,
    dim: usize,
    // channels[i - 1][k] is u_i(t_k)
    channels: Vec<Vec<DMatrix<f64>>>,
}

impl MatrixSignal {
    pub fn new(grid: Grid, dim: usize, channels: Vec<Vec<DMatrix<f64>>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Signal("matrix dimension must be positive".into()));
        }
        for (i, ch) in channels.iter().enumerate() {
            if ch.len() != grid.nodes() {
                return Err(Error::Signal(format!(
                    "channel {} has {} samples, grid has {} nodes",
                    i + 1,
                    ch.len(),
                    grid.nodes()
                )));
            }
            for a in ch {
                if a.nrows() != dim || a.ncols() != dim {
                    return Err(Error::Shape {
                        expected: (dim, dim),
                        found: a.shape(),
                    });
                }
                if a.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Signal(format!("channel {} has a non-finite sample", i + 1)));
                }
            }
        }
        let u = MatrixSignal { grid, dim, channels };
        if !signal_norm(&u).is_finite() {
            return Err(Error::Signal("signal norm is not finite".into()));
        }
        Ok(u)
    }

    /// Samples `f(channel, t)` for channels `1..=m`.
    pub fn from_fn(grid: Grid, m: usize, dim: usize, f: impl Fn(usize, f64) -> DMatrix<f64>) -> Result<Self> {
        let channels = (1..=m).map(|i| grid.times().map(|t| f(i, t)).collect()).collect();
        Self::new(grid, dim, channels)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn m(&self) -> usize {
        self.channels.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.m())
    }

    /// Samples of channel `i >= 1`.
    pub fn channel(&self, i: usize) -> Option<&[DMatrix<f64>]> {
        if i == 0 {
            return None;
        }
        self.channels.get(i - 1).map(Vec::as_slice)
    }

    /// `u_i(t_k)`, with `u_0 = I`.
    pub fn sample(&self, i: usize, k: usize) -> DMatrix<f64> {
        match self.channel(i) {
            Some(ch) => ch[k].clone(),
            None => DMatrix::identity(self.dim, self.dim),
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let channels = self
            .channels
            .iter()
            .map(|ch| ch.iter().map(|a| a * factor).collect())
            .collect();
        Self::new(self.grid, self.dim, channels)
    }

    /// Writes `t,ch,a11,...,ann`, one row per time and channel, entries row-major.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "ch".to_string()];
        for r in 1..=self.dim {
            for c in 1..=self.dim {
                header.push(format!("a{r}{c}"));
            }
        }
        w.write_record(&header)?;
        for k in 0..self.grid.nodes() {
            for (i, ch) in self.channels.iter().enumerate() {
                let mut row = vec![self.grid.t(k).to_string(), (i + 1).to_string()];
                for r in 0..self.dim {
                    for c in 0..self.dim {
                        row.push(ch[k][(r, c)].to_string());
                    }
                }
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = rdr.headers()?.clone();
        let width = header.len();
        if width < 3 || header.get(0) != Some("t") || header.get(1) != Some("ch") {
            return Err(Error::Signal("CSV header must start with `t,ch,a11`".into()));
        }
        let entries = width - 2;
        let dim = (entries as f64).sqrt().round() as usize;
        if dim * dim != entries {
            return Err(Error::Signal(format!(
                "{entries} matrix columns do not form a square matrix"
            )));
        }
        let num = |s: &str, line: usize| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Signal(format!("line {line}: `{s}` is not a number")))
        };

        let mut times: Vec<f64> = Vec::new();
        let mut channels: Vec<Vec<DMatrix<f64>>> = Vec::new();
        for (idx, record) in rdr.records().enumerate() {
            let record = record?;
            let line = idx + 2;
            let t = num(&record[0], line)?;
            let ch: usize = record[1]
                .parse()
                .map_err(|_| Error::Signal(format!("line {line}: bad channel `{}`", &record[1])))?;
            if ch == 0 {
                return Err(Error::Signal(format!(
                    "line {line}: channel 0 is the implicit identity"
                )));
            }
            if ch > MAX_CSV_CHANNELS {
                return Err(Error::Resource {
                    what: "CSV channel index",
                    requested: ch,
                    cap: MAX_CSV_CHANNELS,
                });
            }
            let mut a = DMatrix::zeros(dim, dim);
            for r in 0..dim {
                for c in 0..dim {
                    a[(r, c)] = num(&record[2 + r * dim + c], line)?;
                }
            }
            if times.last() != Some(&t) {
                times.push(t);
            }
            let k = times.len() - 1;
            if ch > channels.len() {
                if k > 0 {
                    return Err(Error::Signal(format!(
                        "line {line}: channel {ch} first appears after t=0"
                    )));
                }
                channels.resize_with(ch, Vec::new);
            }
            let samples = &mut channels[ch - 1];
            if samples.len() != k {
                return Err(Error::Signal(format!(
                    "line {line}: channel {ch} repeated or missing at t={t}"
                )));
            }
            samples.push(a);
        }
        if times.len() < 2 {
            return Err(Error::Signal("need at least two time samples".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::Signal("time grid must start at 0".into()));
        }
        let grid = Grid::new(*times.last().unwrap(), times.len() - 1)?;
        let tol = 1e-9 * grid.horizon().max(1.0);
        for (k, &t) in times.iter().enumerate() {
            if (t - grid.t(k)).abs() > tol {
                return Err(Error::Signal(format!("time grid is not uniform at sample {k} (t={t})")));
            }
        }
        Self::new(grid, dim, channels)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// Nonnegative scalar channels on a grid; drift channel implicit `≡ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSignal {
    grid: Grid,
    channels: Vec<Vec<f64>>,
}

impl ScalarSignal {
    pub fn new(grid: Grid, channels: Vec<Vec<f64>>) -> Result<Self> {
        for (i, ch) in channels.iter().enumerate() {
            if ch.len() != grid.nodes() {
                return Err(Error::Signal(format!("scalar channel {} has wrong length", i + 1)));
            }
            if ch.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::Signal(format!(
                    "scalar channel {} must be finite and nonnegative",
                    i + 1
                )));
            }
        }
        Ok(ScalarSignal { grid, channels })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn m(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, i: usize) -> Option<&[f64]> {
        if i == 0 {
            return None;
        }
        self.channels.get(i - 1).map(Vec::as_slice)
    }

    /// `Ū_i(T) = ∫₀ᵀ ū_i`, with `Ū_0(T) = T`.
    pub fn integral(&self, i: usize) -> f64 {
        match self.channel(i) {
            Some(ch) => trapezoid(ch, self.grid.h()),
            None if i == 0 => self.grid.horizon(),
            None => 0.0,
        }
    }

    pub fn to_matrix_signal(&self) -> MatrixSignal {
        let channels = self
            .channels
            .iter()
            .map(|ch| ch.iter().map(|&x| DMatrix::from_element(1, 1, x)).collect())
            .collect();
        MatrixSignal {
            grid: self.grid,
            dim: 1,
            channels,
        }
    }
}

/// Pointwise `ū_i(t_k) = ‖u_i(t_k)‖₁`.
pub fn ubar(u: &MatrixSignal) -> ScalarSignal {
    let channels = u
        .channels
        .iter()
        .map(|ch| ch.iter().map(matrix_norm1).collect())
        .collect();
    ScalarSignal { grid: u.grid, channels }
}

/// `max_i ∫₀ᵀ ‖u_i‖₁` over channels `i >= 1`, trapezoid rule.
pub fn signal_norm(u: &MatrixSignal) -> f64 {
    let h = u.grid.h();
    u.channels
        .iter()
        .map(|ch| {
            let norms: Vec<f64> = ch.iter().map(matrix_norm1).collect();
            trapezoid(&norms, h)
        })
        .fold(0.0, f64::max)
}

/// `R = max{‖u‖, T}`.
pub fn ball_radius(u: &MatrixSignal) -> f64 {
    signal_norm(u).max(u.grid.horizon())
}

pub fn constant(channels: &[DMatrix<f64>], horizon: f64, panels: usize) -> Result<MatrixSignal> {
    let grid = Grid::new(horizon, panels)?;
    let dim = channels
        .first()
        .map(|a| a.nrows())
        .ok_or_else(|| Error::Signal("constant signal needs at least one channel".into()))?;
    for a in channels {
        if a.nrows() != a.ncols() {
            return Err(Error::Signal(format!(
                "matrix is {}x{}, not square",
                a.nrows(),
                a.ncols()
            )));
        }
    }
    let data = channels.iter().map(|a| vec![a.clone(); grid.nodes()]).collect();
    MatrixSignal::new(grid, dim, data)
}

/// One channel `offset + sin(freq t + phase) amplitude`.
pub fn sinusoid_channel(
    offset: &DMatrix<f64>,
    amplitude: &DMatrix<f64>,
    freq: f64,
    phase: f64,
    horizon: f64,
    panels: usize,
) -> Result<MatrixSignal> {
    let smooth = SmoothSignal {
        dim: offset.nrows(),
        horizon,
        channels: vec![SmoothChannel {
            offset: offset.clone(),
            modes: vec![(amplitude.clone(), freq, phase)],
        }],
    };
    if offset.shape() != amplitude.shape() {
        return Err(Error::Shape {
            expected: offset.shape(),
            found: amplitude.shape(),
        });
    }
    smooth.sample(panels)
}

#[derive(Debug, Clone, PartialEq)]
struct SmoothChannel {
    offset: DMatrix<f64>,
    modes: Vec<(DMatrix<f64>, f64, f64)>,
}

/// A finite trigonometric signal that can be resampled on any grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothSignal {
    dim: usize,
    horizon: f64,
    channels: Vec<SmoothChannel>,
}

impl SmoothSignal {
    /// Seeded random trigonometric channels with entries in `[-scale, scale]`.
    pub fn random(seed: u64, m: usize, dim: usize, horizon: f64, scale: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mat = |rng: &mut ChaCha8Rng| DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-scale..=scale));
        let channels = (0..m)
            .map(|_| {
                let offset = mat(&mut rng);
                let modes = (0..2)
                    .map(|_| {
                        let a = mat(&mut rng);
                        (a, rng.gen_range(1.0..6.0), rng.gen_range(0.0..std::f64::consts::TAU))
                    })
                    .collect();
                SmoothChannel { offset, modes }
            })
            .collect();
        SmoothSignal { dim, horizon, channels }
    }

    pub fn m(&self) -> usize {
        self.channels.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `u_i(t)` for `i >= 1`.
    pub fn value(&self, i: usize, t: f64) -> DMatrix<f64> {
        let ch = &self.channels[i - 1];
        let mut out = ch.offset.clone();
        for (a, freq, phase) in &ch.modes {
            out += a * (freq * t + phase).sin();
        }
        out
    }

    pub fn sample(&self, panels: usize) -> Result<MatrixSignal> {
        let grid = Grid::new(self.horizon, panels)?;
        MatrixSignal::from_fn(grid, self.m(), self.dim, |i, t| self.value(i, t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "x" => Some(Axis::X),
            "y" => Some(Axis::Y),
            "z" => Some(Axis::Z),
            _ => None,
        }
    }

    fn unit(self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
        }
    }
}

/// Direction of the field over `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisSchedule {
    Fixed(Axis),
    /// Quarter turn from the first axis to the second at constant angular speed.
    Rotate(Axis, Axis),
    /// First axis on `[0, T/2)`, second on `[T/2, T]`.
    Switch(Axis, Axis),
}

impl AxisSchedule {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Signal(format!("unknown axis schedule `{s}` (use x, y, z, a-b or a|b)"));
        let pair = |sep: char| -> Result<(Axis, Axis)> {
            let (a, b) = s.split_once(sep).ok_or_else(bad)?;
            Ok((Axis::parse(a).ok_or_else(bad)?, Axis::parse(b).ok_or_else(bad)?))
        };
        if s.contains('-') {
            let (a, b) = pair('-')?;
            Ok(AxisSchedule::Rotate(a, b))
        } else if s.contains('|') {
            let (a, b) = pair('|')?;
            Ok(AxisSchedule::Switch(a, b))
        } else {
            Axis::parse(s).map(AxisSchedule::Fixed).ok_or_else(bad)
        }
    }

    fn direction(self, t: f64, horizon: f64) -> [f64; 3] {
        match self {
            AxisSchedule::Fixed(a) => a.unit(),
            AxisSchedule::Rotate(a, b) => {
                let phi = FRAC_PI_2 * t / horizon;
                let (ua, ub) = (a.unit(), b.unit());
                std::array::from_fn(|i| phi.cos() * ua[i] + phi.sin() * ub[i])
            }
            AxisSchedule::Switch(a, b) => {
                if t < 0.5 * horizon {
                    a.unit()
                } else {
                    b.unit()
                }
            }
        }
    }
}

/// Generators of so(3): `[J_x, J_y] = J_z` and cyclic.
pub fn so3_generators() -> [DMatrix<f64>; 3] {
    [
        DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]),
        DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]),
        DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
    ]
}

/// Real form of a spin in a magnetic field: `U(t) = |B| Σ_a n_a(t) J_a`.
pub fn spin_field(magnitude: f64, schedule: AxisSchedule, horizon: f64, panels: usize) -> Result<MatrixSignal> {
    let grid = Grid::new(horizon, panels)?;
    let gens = so3_generators();
    MatrixSignal::from_fn(grid, 1, 3, |_, t| {
        let n = schedule.direction(t, horizon);
        (&gens[0] * n[0] + &gens[1] * n[1] + &gens[2] * n[2]) * magnitude
    })
}

/// Signal specification as accepted on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalSpec {
    /// `const:<matrix>[;<matrix>...]`, one JSON matrix per channel.
    Const(Vec<DMatrix<f64>>),
    /// `csv:<path>`; the file fixes its own grid.
    Csv(PathBuf),
    /// `spin:<Bmag>,<schedule>`.
    Spin { magnitude: f64, schedule: AxisSchedule },
}

impl SignalSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, rest) = text
            .split_once(':')
            .ok_or_else(|| Error::Signal(format!("signal spec `{text}` has no `kind:` prefix")))?;
        match kind {
            "const" => {
                let mut channels = Vec::new();
                for part in rest.split(';') {
                    let value: serde_json::Value = serde_json::from_str(part.trim())?;
                    let a = matrix_from_json(&value)?;
                    if a.nrows() != a.ncols() {
                        return Err(Error::Signal(format!(
                            "matrix is {}x{}, not square",
                            a.nrows(),
                            a.ncols()
                        )));
                    }
                    if let Some(first) = channels.first() {
                        let first: &DMatrix<f64> = first;
                        if first.shape() != a.shape() {
                            return Err(Error::Shape {
                                expected: first.shape(),
                                found: a.shape(),
                            });
                        }
                    }
                    channels.push(a);
                }
                Ok(SignalSpec::Const(channels))
            }
            "csv" => {
                if rest.is_empty() {
                    return Err(Error::Signal("csv spec needs a path".into()));
                }
                Ok(SignalSpec::Csv(PathBuf::from(rest)))
            }
            "spin" => {
                let (mag, sched) = rest
                    .split_once(',')
                    .ok_or_else(|| Error::Signal("spin spec is `spin:<Bmag>,<schedule>`".into()))?;
                let magnitude: f64 = mag
                    .trim()
                    .parse()
                    .map_err(|_| Error::Signal(format!("bad field magnitude `{mag}`")))?;
                if !magnitude.is_finite() {
                    return Err(Error::Signal("field magnitude must be finite".into()));
                }
                Ok(SignalSpec::Spin {
                    magnitude,
                    schedule: AxisSchedule::parse(sched.trim())?,
                })
            }
            _ => Err(Error::Signal(format!(
                "unknown signal kind `{kind}` (use const, csv or spin)"
            ))),
        }
    }

    /// Samples the signal; `horizon` and `panels` are ignored for CSV input.
    pub fn build(&self, horizon: f64, panels: usize) -> Result<MatrixSignal> {
        match self {
            SignalSpec::Const(channels) => constant(channels, horizon, panels),
            SignalSpec::Csv(path) => MatrixSignal::from_csv_path(path),
            SignalSpec::Spin { magnitude, schedule } => spin_field(*magnitude, *schedule, horizon, panels),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[a, b, c, d])
    }

    #[test]
    fn norm1_examples() {
        assert_eq!(matrix_norm1(&DMatrix::identity(2, 2)), 1.0);
        assert_eq!(matrix_norm1(&m2(0.0, 1.0, -1.0, 0.0)), 1.0);
        assert_eq!(matrix_norm1(&m2(1.0, 2.0, 3.0, 4.0)), 6.0);
    }

    #[test]
    fn ubar_and_norm() {
        let u = constant(&[m2(0.0, 1.0, -1.0, 0.0), DMatrix::zeros(2, 2)], 2.0, 10).unwrap();
        let ub = ubar(&u);
        assert!(ub.channel(1).unwrap().iter().all(|&x| x == 1.0));
        assert!(ub.channel(2).unwrap().iter().all(|&x| x == 0.0));
        assert!((signal_norm(&u) - 2.0).abs() < 1e-15);

        let one = DMatrix::from_element(1, 1, 1.0);
        let three = DMatrix::from_element(1, 1, 3.0);
        assert!((signal_norm(&constant(&[one, three], 1.0, 4).unwrap()) - 3.0).abs() < 1e-15);
        assert_eq!(signal_norm(&constant(&[DMatrix::zeros(2, 2)], 1.0, 4).unwrap()), 0.0);
    }

    #[test]
    fn ubar_signal_has_same_norm() {
        let u = SmoothSignal::random(3, 1, 2, 1.0, 1.0).sample(64).unwrap();
        let v = ubar(&u).to_matrix_signal();
        assert!((signal_norm(&u) - signal_norm(&v)).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let u = SmoothSignal::random(11, 2, 3, 0.7, 2.0).sample(13).unwrap();
        let text = u.to_csv_string().unwrap();
        assert!(text.starts_with("t,ch,a11,a12,a13,a21"));
        let v = MatrixSignal::read_csv(text.as_bytes()).unwrap();
        assert_eq!(v.m(), 2);
        assert_eq!(v.dim(), 3);
        for i in 1..=2 {
            for k in 0..u.grid().nodes() {
                assert!((u.sample(i, k) - v.sample(i, k)).amax() <= 1e-12);
            }
        }
    }

    #[test]
    fn csv_rejects_bad_input() {
        assert!(MatrixSignal::read_csv("t,ch,a11,a12\n0,1,1,2\n".as_bytes()).is_err());
        assert!(MatrixSignal::read_csv("t,ch,a11\n0,1,1\n0.5,1,1\n2,1,1\n".as_bytes()).is_err());
        assert!(MatrixSignal::read_csv("t,ch,a11\n0,0,1\n1,0,1\n".as_bytes()).is_err());
        assert!(MatrixSignal::read_csv("t,ch,a11\n0,1,zz\n1,1,1\n".as_bytes()).is_err());
        assert!(MatrixSignal::read_csv("t,ch,a11\n0,1,1\n1,1,1\n".as_bytes()).is_ok());
    }

    #[test]
    fn spin_commutators() {
        let fixed = spin_field(1.0, AxisSchedule::Fixed(Axis::X), 1.0, 8).unwrap();
        let ch = fixed.channel(1).unwrap();
        assert_eq!(commutator(&ch[0], &ch[5]).amax(), 0.0);

        let switched = spin_field(1.0, AxisSchedule::parse("x|y").unwrap(), 1.0, 8).unwrap();
        let ch = switched.channel(1).unwrap();
        let c = commutator(&ch[0], &ch[8]);
        assert!((c - &so3_generators()[2]).amax() < 1e-15);

        let rot = spin_field(2.0, AxisSchedule::parse("x-y").unwrap(), 1.0, 8).unwrap();
        assert!(commutator(&rot.sample(1, 1), &rot.sample(1, 7)).amax() > 0.1);
    }

    #[test]
    fn spec_parsing() {
        let spec = SignalSpec::parse("const:[[0,1],[-1,0]];[[1,0],[0,1]]").unwrap();
        let u = spec.build(1.0, 4).unwrap();
        assert_eq!((u.m(), u.dim()), (2, 2));
        assert_eq!(u.sample(1, 3), m2(0.0, 1.0, -1.0, 0.0));
        assert_eq!(u.sample(0, 3), DMatrix::identity(2, 2));
        assert!(SignalSpec::parse("const:[[1,2]]").is_err());
        assert!(SignalSpec::parse("const:[[1]];[[1,0],[0,1]]").is_err());
        assert!(SignalSpec::parse("spin:1.5,x-y").is_ok());
        assert!(SignalSpec::parse("spin:1.5,w").is_err());
        assert!(SignalSpec::parse("wave:1").is_err());
        assert!(SignalSpec::parse("nocolon").is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = Grid::new(0.3, 7).unwrap();
        assert_eq!(g.t(7), 0.3);
        assert_eq!(g.t(0), 0.0);
        assert!(Grid::new(1.0, 0).is_err());
        assert!(Grid::new(-1.0, 3).is_err());
    }
}

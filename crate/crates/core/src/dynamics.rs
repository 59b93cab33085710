//! The serial harness with wall exclusion, its coupled runs and the
//! deterministic `nu` recursion.

use std::io::{self, Read, Write};
use std::ops::Range;

use thiserror::Error;

use crate::lattice::{Field, Kernel, KernelError, Stencil, Torus};
use crate::noise::NoiseStream;
use crate::wall::WallField;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("initial level must be finite, got {0}")]
    NonFiniteLevel(f64),
    #[error("exact mode needs L > 2*v*steps = {needed}, got L = {side}")]
    NotExact { side: usize, needed: u64 },
    #[error("coupled configs disagree: {0}")]
    MismatchedConfigs(String),
    #[error("full-field recording is limited to d <= 3 and L <= 129 (got d = {dim}, L = {side})")]
    FullFieldTooLarge { dim: usize, side: usize },
}

/// Initial condition `X_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// `X_0 = 0 v W`, with `0 v -inf = 0`.
    ZeroJoinWall,
    /// `X_0 = r v W`.
    Level(f64),
    /// `X_0 = r` everywhere, ignoring the wall.
    FreeLevel(f64),
}

impl Init {
    pub fn field(&self, wall: &WallField) -> Result<Field, DynamicsError> {
        let (level, join) = match *self {
            Init::ZeroJoinWall => (0.0, true),
            Init::Level(r) => (r, true),
            Init::FreeLevel(r) => (r, false),
        };
        if !level.is_finite() {
            return Err(DynamicsError::NonFiniteLevel(level));
        }
        Ok(if join {
            wall.field().map(|w| w.max(level))
        } else {
            Field::constant(wall.torus(), level)
        })
    }
}

/// Whether the torus must be large enough that no information wraps
/// around before the last step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Exact,
    Torus,
}

impl Mode {
    pub fn check(&self, side: usize, range: u32, steps: u64) -> Result<(), DynamicsError> {
        let needed = 2 * range as u64 * steps;
        if *self == Mode::Exact && (side as u64) <= needed {
            return Err(DynamicsError::NotExact { side, needed });
        }
        Ok(())
    }
}

/// Site update `X_n(i) = rule(PX_{n-1}(i) + eps_n(i), W(i))`.
///
/// Tests swap in broken rules to check that the property suites notice.
pub type SiteRule = fn(f64, f64) -> f64;

/// The exclusion update. `max(W, x)` is `W + (x - W)^+` and `x + (W - x)^+`
/// without their rounding, and gives `x` where `W = -inf`.
pub fn exclusion(x: f64, wall: f64) -> f64 {
    x.max(wall)
}

/// `W + (x - W)^+`, or `x` where `W = -inf`.
pub fn update_w2(x: f64, wall: f64) -> f64 {
    if wall == f64::NEG_INFINITY {
        x
    } else {
        wall + (x - wall).max(0.0)
    }
}

/// `x + (W - x)^+`, or `x` where `W = -inf`.
pub fn update_w3(x: f64, wall: f64) -> f64 {
    if wall == f64::NEG_INFINITY {
        x
    } else {
        x + (wall - x).max(0.0)
    }
}

fn step_with(
    rule: SiteRule,
    prev: &Field,
    wall: &WallField,
    kernel: &Kernel,
    noise: &[f64],
) -> Result<Field, DynamicsError> {
    if prev.torus() != wall.torus() {
        return Err(KernelError::ShapeMismatch {
            got: wall.torus(),
            expected: prev.torus(),
        }
        .into());
    }
    assert_eq!(noise.len(), prev.torus().len(), "one noise value per site");
    let mut out = kernel.apply(prev)?;
    for ((o, &e), &w) in out.values_mut().iter_mut().zip(noise).zip(wall.values()) {
        *o = rule(*o + e, w);
    }
    Ok(out)
}

/// One step of the harness written as `W + (PX + eps - W)^+`.
pub fn step_w2(
    prev: &Field,
    wall: &WallField,
    kernel: &Kernel,
    noise: &[f64],
) -> Result<Field, DynamicsError> {
    step_with(update_w2, prev, wall, kernel, noise)
}

/// One step of the harness written as `PX + eps + (W - PX - eps)^+`.
pub fn step_w3(
    prev: &Field,
    wall: &WallField,
    kernel: &Kernel,
    noise: &[f64],
) -> Result<Field, DynamicsError> {
    step_with(update_w3, prev, wall, kernel, noise)
}

/// Everything needed to run one process.
#[derive(Debug, Clone)]
pub struct ProcessConfig {
    pub kernel: Kernel,
    pub wall: WallField,
    pub init: Init,
    pub steps: u64,
    pub noise: NoiseStream,
    pub mode: Mode,
}

impl ProcessConfig {
    pub fn torus(&self) -> Torus {
        self.wall.torus()
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        Stencil::new(&self.kernel, self.torus())?;
        self.mode
            .check(self.torus().side(), self.kernel.range(), self.steps)?;
        self.init.field(&self.wall)?;
        Ok(())
    }
}

/// What a run keeps besides the origin series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Record {
    #[default]
    Origin,
    Fields,
}

/// A run of `steps` updates: `origin[n] = X_n(0)` for `n = 0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub origin: Vec<f64>,
    /// Number of sites where the wall was active at each step (index 0 is
    /// the initial condition and counts sites with `X_0 = W`).
    pub wall_contacts: Vec<u64>,
    /// `X_n` for every `n`, when recorded.
    pub fields: Option<Vec<Field>>,
    /// `X_steps`.
    pub last: Field,
}

impl Trajectory {
    pub fn steps(&self) -> u64 {
        self.origin.len() as u64 - 1
    }
}

/// A process advanced one step at a time.
#[derive(Debug, Clone)]
pub struct Process {
    stencil: Stencil,
    wall: Vec<f64>,
    state: Vec<f64>,
    next: Vec<f64>,
    /// `None` is the engine's [`exclusion`], applied inline.
    rule: Option<SiteRule>,
    n: u64,
}

impl Process {
    pub fn new(kernel: &Kernel, wall: &WallField, init: Init) -> Result<Self, DynamicsError> {
        Self::build(kernel, wall, init, None)
    }

    pub fn with_rule(
        kernel: &Kernel,
        wall: &WallField,
        init: Init,
        rule: SiteRule,
    ) -> Result<Self, DynamicsError> {
        Self::build(kernel, wall, init, Some(rule))
    }

    fn build(
        kernel: &Kernel,
        wall: &WallField,
        init: Init,
        rule: Option<SiteRule>,
    ) -> Result<Self, DynamicsError> {
        let stencil = Stencil::new(kernel, wall.torus())?;
        let state = init.field(wall)?.into_values();
        Ok(Process {
            stencil,
            wall: wall.values().to_vec(),
            next: vec![0.0; state.len()],
            state,
            rule,
            n: 0,
        })
    }

    pub fn torus(&self) -> Torus {
        self.stencil.torus()
    }

    /// Steps taken so far.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn field(&self) -> Field {
        Field::from_vec(self.torus(), self.state.clone()).expect("state matches torus")
    }

    pub fn origin(&self) -> f64 {
        self.state[0]
    }

    pub fn wall(&self) -> &[f64] {
        &self.wall
    }

    /// Sites where the current height sits on the wall.
    pub fn contacts(&self) -> u64 {
        self.state
            .iter()
            .zip(&self.wall)
            .filter(|(x, w)| x == w)
            .count() as u64
    }

    /// `PX_n`, the averaged field before noise and exclusion.
    pub fn averaged(&mut self, out: &mut [f64]) {
        self.stencil.apply(&self.state, out);
    }

    /// Like [`step`](Self::step), also storing `PX_n + eps_{n+1}` (the
    /// height before exclusion) in `drift`.
    pub fn step_observed(&mut self, noise: &[f64], drift: &mut [f64]) {
        let side = self.stencil.torus().side();
        for (row, (e, d)) in noise.chunks_exact(side).zip(drift.chunks_exact_mut(side)).enumerate() {
            self.step_segment(row, 0..side, Some(e), Some(d));
        }
        self.commit();
    }

    /// Advances with the given noise values `eps_{n+1}`.
    pub fn step(&mut self, noise: &[f64]) {
        let side = self.stencil.torus().side();
        for (row, e) in noise.chunks_exact(side).enumerate() {
            self.step_segment(row, 0..side, Some(e), None);
        }
        self.commit();
    }

    /// Computes the sites `row * L + c`, `c` in `cols`, of the next state.
    /// `noise` and `drift` hold the values of those sites only; without
    /// `noise` the step is noiseless. The step takes effect at
    /// [`commit`](Self::commit); until then [`pending`](Self::pending)
    /// shows the partial next state.
    pub fn step_segment(
        &mut self,
        row: usize,
        cols: Range<usize>,
        noise: Option<&[f64]>,
        drift: Option<&mut [f64]>,
    ) {
        let side = self.stencil.torus().side();
        let sites = row * side + cols.start..row * side + cols.end;
        let out = &mut self.next[sites.clone()];
        self.stencil.apply_segment(&self.state, row, cols, out);
        let wall = &self.wall[sites];
        match (noise, drift) {
            (Some(noise), Some(drift)) => {
                for (((o, d), &e), &w) in out.iter_mut().zip(drift).zip(noise).zip(wall) {
                    *d = *o + e;
                    *o = match self.rule {
                        None => exclusion(*d, w),
                        Some(rule) => rule(*d, w),
                    };
                }
            }
            (Some(noise), None) => {
                let sites = out.iter_mut().zip(noise).zip(wall);
                match self.rule {
                    None => sites.for_each(|((o, &e), &w)| *o = exclusion(*o + e, w)),
                    Some(rule) => sites.for_each(|((o, &e), &w)| *o = rule(*o + e, w)),
                }
            }
            (None, Some(drift)) => {
                drift.copy_from_slice(out);
                let rule = self.rule.unwrap_or(exclusion);
                out.iter_mut().zip(wall).for_each(|(o, &w)| *o = rule(*o, w));
            }
            (None, None) => {
                let sites = out.iter_mut().zip(wall);
                match self.rule {
                    None => sites.for_each(|(o, &w)| *o = exclusion(*o, w)),
                    Some(rule) => sites.for_each(|(o, &w)| *o = rule(*o, w)),
                }
            }
        }
    }

    /// The next state as far as [`step_segment`](Self::step_segment) got.
    pub fn pending(&self) -> &[f64] {
        &self.next
    }

    /// Completes a step built from blocks.
    pub fn commit(&mut self) {
        std::mem::swap(&mut self.state, &mut self.next);
        self.n += 1;
    }

    /// Advances with zero noise.
    fn step_noiseless(&mut self) {
        let side = self.stencil.torus().side();
        for row in 0..self.state.len() / side {
            self.step_segment(row, 0..side, None, None);
        }
        self.commit();
    }
}

/// Advances coupled processes one step with the noise `eps_n`, computing
/// only the sites in `segments` (as from [`Torus::box_segments`]). `buf`
/// is scratch space.
pub fn step_segments(
    procs: &mut [Process],
    noise: &NoiseStream,
    n: u64,
    segments: &[(usize, Range<usize>)],
    buf: &mut Vec<f64>,
) {
    let Some(side) = procs.first().map(|p| p.torus().side()) else {
        return;
    };
    // Segments that are adjacent in memory share one noise fill.
    let mut rest = segments;
    while let Some((first, _)) = rest.first() {
        let start = first * side + rest[0].1.start;
        let mut end = start;
        let mut count = 0;
        for (row, cols) in rest {
            if row * side + cols.start != end {
                break;
            }
            end = row * side + cols.end;
            count += 1;
        }
        buf.resize(buf.len().max(end - start), 0.0);
        noise.fill_from(n, start, &mut buf[..end - start]);
        for p in procs.iter_mut() {
            let mut eps = &buf[..end - start];
            for (row, cols) in &rest[..count] {
                let (here, tail) = eps.split_at(cols.len());
                p.step_segment(*row, cols.clone(), Some(here), None);
                eps = tail;
            }
        }
        rest = &rest[count..];
    }
    procs.iter_mut().for_each(Process::commit);
}

/// Sites of the state at step `n` that can still reach the origin by step
/// `last`: the box `|j|_inf <= v (last - n)`.
pub fn cone_segments(torus: Torus, range: u32, last: u64, n: u64) -> Vec<(usize, Range<usize>)> {
    let radius = (range as u64).saturating_mul(last.saturating_sub(n));
    torus.box_segments(radius.min(torus.side() as u64) as usize)
}

fn check_full_field(torus: Torus) -> Result<(), DynamicsError> {
    if torus.dim() > 3 || torus.side() > 129 {
        return Err(DynamicsError::FullFieldTooLarge {
            dim: torus.dim(),
            side: torus.side(),
        });
    }
    Ok(())
}

/// Runs one process for `config.steps` steps.
pub fn run(config: &ProcessConfig, record: Record) -> Result<Trajectory, DynamicsError> {
    Ok(run_coupled(std::slice::from_ref(config), record)?.remove(0))
}

/// Runs several processes on the same noise realization.
pub fn run_coupled(
    configs: &[ProcessConfig],
    record: Record,
) -> Result<Vec<Trajectory>, DynamicsError> {
    let Some(first) = configs.first() else {
        return Ok(Vec::new());
    };
    for (k, c) in configs.iter().enumerate().skip(1) {
        let what = if c.kernel != first.kernel {
            "kernel"
        } else if c.torus() != first.torus() {
            "domain"
        } else if c.steps != first.steps {
            "steps"
        } else if c.noise != first.noise {
            "noise stream"
        } else {
            continue;
        };
        return Err(DynamicsError::MismatchedConfigs(format!(
            "config {k} differs from config 0 in its {what}"
        )));
    }
    first.validate()?;
    if record == Record::Fields {
        check_full_field(first.torus())?;
    }
    let mut procs = configs
        .iter()
        .map(|c| Process::new(&c.kernel, &c.wall, c.init))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out: Vec<Trajectory> = procs
        .iter()
        .map(|p| Trajectory {
            origin: vec![p.origin()],
            wall_contacts: vec![p.contacts()],
            fields: (record == Record::Fields).then(|| vec![p.field()]),
            last: p.field(),
        })
        .collect();
    let mut eps = vec![0.0; first.torus().len()];
    for n in 1..=first.steps {
        first.noise.fill(n, &mut eps);
        for (p, t) in procs.iter_mut().zip(out.iter_mut()) {
            p.step(&eps);
            t.origin.push(p.origin());
            t.wall_contacts.push(p.contacts());
            if let Some(f) = t.fields.as_mut() {
                f.push(p.field());
            }
        }
    }
    for (p, t) in procs.iter().zip(out.iter_mut()) {
        t.last = p.field();
    }
    Ok(out)
}

/// `nu_0 = 0 v W`, with `-inf` sites starting at 0.
pub fn nu_init(wall: &WallField) -> Field {
    wall.field().map(|w| w.max(0.0))
}

/// `nu_n(i) = max(W(i), P nu_{n-1}(i))`; at `-inf` sites this is `P nu_{n-1}(i)`.
pub fn nu_step(prev: &Field, wall: &WallField, kernel: &Kernel) -> Result<Field, DynamicsError> {
    let mut out = kernel.apply(prev)?;
    for (o, &w) in out.values_mut().iter_mut().zip(wall.values()) {
        *o = exclusion(*o, w);
    }
    Ok(out)
}

/// The `nu` recursion for one wall, stepped in place.
#[derive(Debug, Clone)]
pub struct NuProcess {
    inner: Process,
}

impl NuProcess {
    pub fn new(kernel: &Kernel, wall: &WallField) -> Result<Self, DynamicsError> {
        let mut inner = Process::new(kernel, wall, Init::ZeroJoinWall)?;
        inner.state = nu_init(wall).into_values();
        Ok(NuProcess { inner })
    }

    pub fn n(&self) -> u64 {
        self.inner.n()
    }

    pub fn state(&self) -> &[f64] {
        self.inner.state()
    }

    pub fn field(&self) -> Field {
        self.inner.field()
    }

    pub fn step(&mut self) {
        self.inner.step_noiseless();
    }

    /// See [`Process::step_segment`].
    pub fn step_segment(&mut self, row: usize, cols: Range<usize>) {
        self.inner.step_segment(row, cols, None, None);
    }

    pub fn pending(&self) -> &[f64] {
        self.inner.pending()
    }

    pub fn commit(&mut self) {
        self.inner.commit();
    }

    /// `P nu_n`.
    pub fn averaged(&mut self) -> Vec<f64> {
        let mut out = vec![0.0; self.inner.state.len()];
        self.inner.averaged(&mut out);
        out
    }
}

/// Outcome of comparing `nu` for `W~` with `nu` for its two pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub steps: u64,
    /// Largest `max(nu^{W~^i}, nu^{W~_i}) - nu^{W~}` seen (0 when all hold).
    pub lower_violation: f64,
    /// Largest `nu^{W~} - (nu^{W~^i} + nu^{W~_i})` seen.
    pub upper_violation: f64,
    /// `(step, site)` of the worst violation, if any exceeded the tolerance.
    pub worst: Option<(u64, usize)>,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.worst.is_none()
    }
}

/// Relative tolerance for pathwise float comparisons.
pub const PATHWISE_TOL: f64 = 1e-12;

/// `a <= b` up to rounding.
pub fn le_tol(a: f64, b: f64) -> bool {
    a <= b || a - b <= PATHWISE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Checks `nu^{W~^i} v nu^{W~_i} <= nu^{W~} <= nu^{W~^i} + nu^{W~_i}` at
/// every site for steps `0..=n`.
pub fn nu_sandwich_check(
    kernel: &Kernel,
    tilde: &WallField,
    site: usize,
    n: u64,
) -> Result<SandwichReport, DynamicsError> {
    let (without, only) = tilde.decompose_at(site);
    let mut whole = NuProcess::new(kernel, tilde)?;
    let mut a = NuProcess::new(kernel, &without)?;
    let mut b = NuProcess::new(kernel, &only)?;
    let mut report = SandwichReport {
        steps: n,
        lower_violation: 0.0,
        upper_violation: 0.0,
        worst: None,
    };
    let mut worst_excess = 0.0;
    for step in 0..=n {
        if step > 0 {
            whole.step();
            a.step();
            b.step();
        }
        for (j, ((&c, &x), &y)) in whole.state().iter().zip(a.state()).zip(b.state()).enumerate() {
            let lower = x.max(y);
            let upper = x + y;
            if lower <= c && c <= upper {
                continue;
            }
            report.lower_violation = f64::max(report.lower_violation, lower - c);
            report.upper_violation = f64::max(report.upper_violation, c - upper);
            let excess = f64::max(lower - c, c - upper);
            if (!le_tol(lower, c) || !le_tol(c, upper)) && excess > worst_excess {
                worst_excess = excess;
                report.worst = Some((step, j));
            }
        }
    }
    Ok(report)
}

/// One line of a trajectory export.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub replicate: u64,
    pub n: u64,
    pub x_origin: f64,
    pub y_origin: f64,
    pub wall_origin: f64,
}

/// Rows for a wall process `x` and its coupled free process `y`.
pub fn trajectory_rows(
    replicate: u64,
    x: &Trajectory,
    y: &Trajectory,
    wall_origin: f64,
) -> Vec<TrajectoryRow> {
    x.origin
        .iter()
        .zip(&y.origin)
        .enumerate()
        .map(|(n, (&x_origin, &y_origin))| TrajectoryRow {
            replicate,
            n: n as u64,
            x_origin,
            y_origin,
            wall_origin,
        })
        .collect()
}

pub fn write_trajectory_csv<W: Write>(out: W, rows: &[TrajectoryRow]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["replicate", "n", "X_origin", "Y_origin_coupled", "wall_origin"])?;
    for r in rows {
        w.write_record([
            r.replicate.to_string(),
            r.n.to_string(),
            r.x_origin.to_string(),
            r.y_origin.to_string(),
            r.wall_origin.to_string(),
        ])?;
    }
    w.flush()
}

const SNAPSHOT_MAGIC: &[u8; 8] = b"HARNSNAP";
const SNAPSHOT_VERSION: u32 = 1;

/// Binary field dump: magic, version (u32), dims (u32), L (u64), step
/// (u64), then `L^d` little-endian f64 values in site order.
pub fn write_snapshot<W: Write>(mut out: W, field: &Field, step: u64) -> io::Result<()> {
    let torus = field.torus();
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    out.write_all(&(torus.dim() as u32).to_le_bytes())?;
    out.write_all(&(torus.side() as u64).to_le_bytes())?;
    out.write_all(&step.to_le_bytes())?;
    for v in field.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut input: R) -> io::Result<(Field, u64)> {
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(bad("not a snapshot file"));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b4)?;
    if u32::from_le_bytes(b4) != SNAPSHOT_VERSION {
        return Err(bad("unsupported snapshot version"));
    }
    input.read_exact(&mut b4)?;
    let dim = u32::from_le_bytes(b4) as usize;
    input.read_exact(&mut b8)?;
    let side = u64::from_le_bytes(b8) as usize;
    input.read_exact(&mut b8)?;
    let step = u64::from_le_bytes(b8);
    if dim == 0 || side == 0 || dim > 8 {
        return Err(bad("bad snapshot dimensions"));
    }
    let torus = Torus::new(dim, side);
    let mut values = Vec::with_capacity(torus.len());
    for _ in 0..torus.len() {
        input.read_exact(&mut b8)?;
        values.push(f64::from_le_bytes(b8));
    }
    let field = Field::from_vec(torus, values).ok_or_else(|| bad("bad snapshot length"))?;
    Ok((field, step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::SymmetricLaw;

    const NEG: f64 = f64::NEG_INFINITY;

    fn line(values: &[f64]) -> Field {
        Field::from_vec(Torus::new(1, values.len()), values.to_vec()).unwrap()
    }

    fn eps_at_origin(len: usize, e: f64) -> Vec<f64> {
        let mut v = vec![0.0; len];
        v[0] = e;
        v
    }

    #[test]
    fn step_examples() {
        let k = Kernel::simple_random_walk(1);
        let prev = line(&[0.0; 5]);
        let zero = WallField::new(line(&[0.0; 5]));
        let out = step_w2(&prev, &zero, &k, &eps_at_origin(5, 0.5)).unwrap();
        assert_eq!(out.origin(), 0.5);
        let out = step_w2(&prev, &zero, &k, &eps_at_origin(5, -0.5)).unwrap();
        assert_eq!(out.origin(), 0.0);
        let free = WallField::new(line(&[NEG; 5]));
        let out = step_w2(&prev, &free, &k, &eps_at_origin(5, -0.5)).unwrap();
        assert_eq!(out.origin(), -0.5);
    }

    #[test]
    fn w3_extremes() {
        assert_eq!(update_w3(0.3, 1e6), 1e6);
        assert_eq!(update_w3(0.3, -1e6), 0.3);
        assert_eq!(update_w2(0.3, 1e6), 1e6);
        // The literal form rounds through the wall height.
        assert!((update_w2(0.3, -1e6) - 0.3).abs() < 1e-9);
        assert_eq!(exclusion(0.3, -1e6), 0.3);
    }

    #[test]
    fn infinite_prev_is_rejected() {
        let k = Kernel::simple_random_walk(1);
        let prev = line(&[0.0, NEG, 0.0]);
        let wall = WallField::new(line(&[0.0; 3]));
        assert_eq!(
            step_w2(&prev, &wall, &k, &[0.0; 3]),
            Err(DynamicsError::Kernel(KernelError::InfiniteValue(1)))
        );
    }

    #[test]
    fn init_lines() {
        let wall = WallField::new(line(&[-1.0, 2.0, NEG]));
        assert_eq!(
            Init::ZeroJoinWall.field(&wall).unwrap().values(),
            &[0.0, 2.0, 0.0]
        );
        assert_eq!(Init::Level(1.5).field(&wall).unwrap().values(), &[1.5, 2.0, 1.5]);
        assert_eq!(Init::FreeLevel(1.5).field(&wall).unwrap().values(), &[1.5; 3]);
        assert!(Init::Level(f64::INFINITY).field(&wall).is_err());
    }

    fn config(wall: WallField, steps: u64) -> ProcessConfig {
        ProcessConfig {
            kernel: Kernel::simple_random_walk(wall.torus().dim()),
            wall,
            init: Init::ZeroJoinWall,
            steps,
            noise: NoiseStream::new(SymmetricLaw::gaussian(1.0), 4),
            mode: Mode::Exact,
        }
    }

    #[test]
    fn exactness_rule() {
        let t = Torus::new(2, 21);
        assert!(matches!(
            run(&config(WallField::free(t), 11), Record::Origin),
            Err(DynamicsError::NotExact { side: 21, needed: 22 })
        ));
        assert!(run(&config(WallField::free(t), 10), Record::Origin).is_ok());
        let mut c = config(WallField::free(t), 50);
        c.mode = Mode::Torus;
        assert_eq!(run(&c, Record::Origin).unwrap().origin.len(), 51);
    }

    #[test]
    fn run_matches_repeated_step_w2() {
        let t = Torus::new(2, 25);
        let wall = crate::wall::sample_wall(
            &crate::wall::WallSpec::symmetric(SymmetricLaw::laplace(1.0)),
            2,
            0,
            t,
        );
        let c = config(wall.clone(), 12);
        let traj = run(&c, Record::Fields).unwrap();
        let mut x = Init::ZeroJoinWall.field(&wall).unwrap();
        let mut eps = vec![0.0; t.len()];
        for n in 1..=12 {
            c.noise.fill(n, &mut eps);
            x = step_w2(&x, &wall, &c.kernel, &eps).unwrap();
            let rec = &traj.fields.as_ref().unwrap()[n as usize];
            for (a, b) in rec.values().iter().zip(x.values()) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
        assert_eq!(traj.last, traj.fields.as_ref().unwrap()[12]);
    }

    #[test]
    fn zero_wall_stays_nonnegative() {
        let t = Torus::new(3, 9);
        let mut c = config(WallField::flat(t, 0.0), 40);
        c.mode = Mode::Torus;
        let traj = run(&c, Record::Origin).unwrap();
        assert!(traj.origin.iter().all(|&z| z >= 0.0));
        assert!(traj.last.min() >= 0.0);
        assert!(traj.wall_contacts[1..].iter().any(|&c| c > 0));
    }

    #[test]
    fn coupled_runs_share_noise() {
        let t = Torus::new(1, 41);
        let a = config(WallField::free(t), 20);
        let mut b = a.clone();
        b.init = Init::FreeLevel(3.0);
        let out = run_coupled(&[a.clone(), b], Record::Origin).unwrap();
        // A constant shift of a free process is preserved exactly in law and
        // path: P(x + 3) = Px + 3.
        for (y, y3) in out[0].origin.iter().zip(&out[1].origin) {
            assert!((y3 - y - 3.0).abs() < 1e-12);
        }
        let mut c = a.clone();
        c.steps = 19;
        assert!(matches!(
            run_coupled(&[a.clone(), c], Record::Origin),
            Err(DynamicsError::MismatchedConfigs(_))
        ));
        let mut c = a.clone();
        c.noise = c.noise.for_replicate(1);
        assert!(run_coupled(&[a, c], Record::Origin).is_err());
    }

    #[test]
    fn full_field_cap() {
        let t = Torus::new(1, 301);
        let c = config(WallField::free(t), 3);
        assert!(matches!(
            run(&c, Record::Fields),
            Err(DynamicsError::FullFieldTooLarge { .. })
        ));
        assert!(run(&c, Record::Origin).is_ok());
    }

    #[test]
    fn nu_single_spike_and_flat() {
        let k = Kernel::simple_random_walk(2);
        let t = Torus::new(2, 41);
        let mut f = Field::constant(t, NEG);
        f.set(&[0, 0], 2.5);
        let spike = WallField::new(f);
        let mut nu = NuProcess::new(&k, &spike).unwrap();
        for _ in 0..20 {
            nu.step();
            assert_eq!(nu.state()[0], 2.5);
            assert!(nu.state().iter().all(|&v| (0.0..=2.5).contains(&v)));
        }
        let flat = WallField::flat(t, 1.25);
        let mut nu = NuProcess::new(&k, &flat).unwrap();
        for _ in 0..5 {
            nu.step();
            assert!(nu.state().iter().all(|&v| v == 1.25));
        }
    }

    #[test]
    fn nu_step_matches_process() {
        let k = Kernel::simple_random_walk(1);
        let wall = WallField::new(line(&[1.0, NEG, 0.5, NEG, NEG, 3.0, NEG]));
        let mut nu = NuProcess::new(&k, &wall).unwrap();
        let mut f = nu_init(&wall);
        assert_eq!(f.values(), &[1.0, 0.0, 0.5, 0.0, 0.0, 3.0, 0.0]);
        for _ in 0..10 {
            nu.step();
            f = nu_step(&f, &wall, &k).unwrap();
            assert_eq!(f.values(), nu.state());
        }
    }

    #[test]
    fn sandwich_degenerate_cases() {
        let k = Kernel::simple_random_walk(2);
        let t = Torus::new(2, 15);
        let r = nu_sandwich_check(&k, &WallField::free(t), 3, 6).unwrap();
        assert!(r.holds());
        assert_eq!((r.lower_violation, r.upper_violation), (0.0, 0.0));
        let mut f = Field::constant(t, NEG);
        f.values_mut()[3] = 1.7;
        let r = nu_sandwich_check(&k, &WallField::new(f), 3, 6).unwrap();
        assert!(r.holds());
        assert_eq!((r.lower_violation, r.upper_violation), (0.0, 0.0));
    }

    #[test]
    fn snapshot_round_trip() {
        let t = Torus::new(2, 3);
        let f = Field::from_vec(t, vec![0.5, NEG, -1.0, 2.0, 1e-300, 3.0, 0.0, -0.0, 7.0]).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f, 42).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 4 + 8 + 8 + 9 * 8);
        let (g, step) = read_snapshot(&buf[..]).unwrap();
        assert_eq!(step, 42);
        assert_eq!(g.values()[1], NEG);
        assert!(f.values().iter().zip(g.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert!(read_snapshot(&buf[..20]).is_err());
    }

    #[test]
    fn trajectory_csv_layout() {
        let t = Torus::new(1, 11);
        let x = config(WallField::flat(t, 0.0), 2);
        let y = config(WallField::free(t), 2);
        let out = run_coupled(&[x, y], Record::Origin).unwrap();
        let rows = trajectory_rows(7, &out[0], &out[1], 0.0);
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "replicate,n,X_origin,Y_origin_coupled,wall_origin");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("7,0,0,0,0"));
    }
}

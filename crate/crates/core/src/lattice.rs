//! Lattice geometry, dense fields and the finite-range transition kernel.
//!
//! All dynamics run on a periodic box (a torus of side `L` in each of `d`
//! axes). Sites are flattened row-major with the last axis contiguous, so
//! the origin is index 0.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;

use thiserror::Error;

/// Integer displacement vector in `Z^d`.
pub type Offset = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("kernel has no weights")]
    Empty,
    #[error("offset {offset:?} has {got} coordinates but the kernel dimension is {dim}")]
    DimensionMismatch { offset: Offset, got: usize, dim: usize },
    #[error("weights are not a probability distribution: {0}")]
    NonStochastic(String),
    #[error("kernel is not symmetric: p({offset:?}) = {forward} but p(-{offset:?}) = {backward}")]
    Asymmetric {
        offset: Offset,
        forward: f64,
        backward: f64,
    },
    #[error("offset {offset:?} has graph distance {distance}, beyond the kernel range {range}")]
    RangeViolation {
        offset: Offset,
        distance: u64,
        range: u32,
    },
    #[error("kernel support generates a proper sublattice of Z^{dim} (index {index}, 0 = lower rank); the walk is not truly {dim}-dimensional")]
    NotFullDimensional { dim: usize, index: u64 },
    #[error("field holds -inf at site {0}; the kernel only acts on finite fields")]
    InfiniteValue(usize),
    #[error("torus side {side} is below 2v+1 = {needed}")]
    DomainTooSmall { side: usize, needed: usize },
    #[error("radius {radius} is below v*m = {needed}; the m-step law would be truncated")]
    RadiusTooSmall { radius: usize, needed: usize },
    #[error("field lives on a {got:?} torus, expected {expected:?}")]
    ShapeMismatch { got: Torus, expected: Torus },
}

/// Graph distance `|j|` on `Z^d` (minimal nearest-neighbour path length).
pub fn graph_norm(offset: &[i64]) -> u64 {
    offset.iter().map(|c| c.unsigned_abs()).sum()
}

/// Periodic box `{0, .., L-1}^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Torus {
    dim: usize,
    side: usize,
}

impl Torus {
    pub fn new(dim: usize, side: usize) -> Self {
        assert!(dim >= 1, "torus dimension must be positive");
        assert!(side >= 1, "torus side must be positive");
        Torus { dim, side }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat index of a site, coordinates taken modulo the side.
    pub fn index(&self, coords: &[i64]) -> usize {
        debug_assert_eq!(coords.len(), self.dim);
        let l = self.side as i64;
        coords
            .iter()
            .fold(0usize, |acc, &c| acc * self.side + c.rem_euclid(l) as usize)
    }

    /// Coordinates in `[0, L)`.
    pub fn coords(&self, mut index: usize) -> Vec<i64> {
        let mut out = vec![0; self.dim];
        for slot in out.iter_mut().rev() {
            *slot = (index % self.side) as i64;
            index /= self.side;
        }
        out
    }

    /// Coordinates of the representative closest to the origin.
    pub fn centered(&self, index: usize) -> Vec<i64> {
        let l = self.side as i64;
        self.coords(index)
            .into_iter()
            .map(|c| if 2 * c > l { c - l } else { c })
            .collect()
    }

    /// The box `|j|_inf <= radius` around the origin as runs of sites
    /// along the last axis: `(row, columns)` with site `row * L + column`,
    /// in increasing site order.
    pub fn box_segments(&self, radius: usize) -> Vec<(usize, Range<usize>)> {
        let side = self.side;
        let whole = 2 * radius + 1 >= side;
        let span: Vec<i64> = if whole {
            (0..side as i64).collect()
        } else {
            (-(radius as i64)..=radius as i64).collect()
        };
        let mut rows = vec![0usize];
        for _ in 1..self.dim {
            rows = rows
                .iter()
                .flat_map(|&r| span.iter().map(move |&c| r * side + c.rem_euclid(side as i64) as usize))
                .collect();
        }
        rows.sort_unstable();
        let cols = if whole {
            vec![0..side]
        } else if radius == 0 {
            vec![0..1]
        } else {
            vec![0..radius + 1, side - radius..side]
        };
        rows.into_iter()
            .flat_map(|r| cols.iter().map(move |c| (r, c.clone())))
            .collect()
    }

    /// Graph distance from the origin of the centered representative.
    pub fn distance_from_origin(&self, index: usize) -> u64 {
        graph_norm(&self.centered(index))
    }

    /// True when the graph ball of `radius` around a site does not wrap.
    pub fn holds_ball(&self, radius: u64) -> bool {
        2 * radius < self.side as u64
    }

    /// Flat index of the point reflection `i -> -i`.
    pub fn negate(&self, index: usize) -> usize {
        let c: Vec<i64> = self.coords(index).into_iter().map(|x| -x).collect();
        self.index(&c)
    }
}

/// Dense array of extended reals over a torus.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    torus: Torus,
    values: Vec<f64>,
}

impl Field {
    pub fn from_vec(torus: Torus, values: Vec<f64>) -> Option<Self> {
        (values.len() == torus.len()).then_some(Field { torus, values })
    }

    pub fn constant(torus: Torus, value: f64) -> Self {
        Field {
            torus,
            values: vec![value; torus.len()],
        }
    }

    pub fn zeros(torus: Torus) -> Self {
        Self::constant(torus, 0.0)
    }

    /// `height` at `site`, zero elsewhere.
    pub fn delta(torus: Torus, site: &[i64], height: f64) -> Self {
        let mut f = Self::zeros(torus);
        f.values[torus.index(site)] = height;
        f
    }

    pub fn torus(&self) -> Torus {
        self.torus
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, site: &[i64]) -> f64 {
        self.values[self.torus.index(site)]
    }

    pub fn set(&mut self, site: &[i64], value: f64) {
        let i = self.torus.index(site);
        self.values[i] = value;
    }

    pub fn origin(&self) -> f64 {
        self.values[0]
    }

    /// First site holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Translate: `out(i) = self(i - by)`.
    pub fn shifted(&self, by: &[i64]) -> Field {
        let mut out = Field::zeros(self.torus);
        for (i, &v) in self.values.iter().enumerate() {
            let c: Vec<i64> = self
                .torus
                .coords(i)
                .iter()
                .zip(by)
                .map(|(a, b)| a + b)
                .collect();
            out.values[self.torus.index(&c)] = v;
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            torus: self.torus,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.torus, other.torus);
        Field {
            torus: self.torus,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

/// Unvalidated kernel description: `p(j)` for finitely many offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub dim: usize,
    pub range: u32,
    pub weights: BTreeMap<Offset, f64>,
}

impl KernelSpec {
    /// Nearest-neighbour walk, `p(±e_k) = 1/(2d)`.
    pub fn simple_random_walk(dim: usize) -> Self {
        let w = 1.0 / (2 * dim) as f64;
        let mut weights = BTreeMap::new();
        for k in 0..dim {
            for s in [-1, 1] {
                let mut e = vec![0; dim];
                e[k] = s;
                weights.insert(e, w);
            }
        }
        KernelSpec {
            dim,
            range: 1,
            weights,
        }
    }

    pub fn validate(&self) -> Result<Kernel, KernelError> {
        validate_kernel(self)
    }
}

const STOCHASTIC_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-15;

/// Checks stochasticity, symmetry, finite range and full dimensionality.
pub fn validate_kernel(spec: &KernelSpec) -> Result<Kernel, KernelError> {
    if spec.weights.is_empty() {
        return Err(KernelError::Empty);
    }
    let dim = spec.dim;
    let mut total = 0.0;
    for (offset, &w) in &spec.weights {
        if offset.len() != dim {
            return Err(KernelError::DimensionMismatch {
                offset: offset.clone(),
                got: offset.len(),
                dim,
            });
        }
        if !w.is_finite() || w < 0.0 {
            return Err(KernelError::NonStochastic(format!(
                "p({offset:?}) = {w} is not a probability"
            )));
        }
        total += w;
    }
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        return Err(KernelError::NonStochastic(format!(
            "weights sum to {total}, not 1"
        )));
    }
    for (offset, &w) in &spec.weights {
        let neg: Offset = offset.iter().map(|c| -c).collect();
        let back = spec.weights.get(&neg).copied().unwrap_or(0.0);
        if (w - back).abs() > SYMMETRY_TOL * w.max(back).max(1.0) {
            return Err(KernelError::Asymmetric {
                offset: offset.clone(),
                forward: w,
                backward: back,
            });
        }
    }
    for (offset, &w) in &spec.weights {
        let distance = graph_norm(offset);
        if w > 0.0 && distance > spec.range as u64 {
            return Err(KernelError::RangeViolation {
                offset: offset.clone(),
                distance,
                range: spec.range,
            });
        }
    }
    let generators: Vec<&Offset> = spec
        .weights
        .iter()
        .filter(|(o, &w)| w > 0.0 && o.iter().any(|&c| c != 0))
        .map(|(o, _)| o)
        .collect();
    let index = sublattice_index(&generators, dim);
    if index != 1 {
        return Err(KernelError::NotFullDimensional { dim, index });
    }

    let zero = vec![0; dim];
    let stay = spec.weights.get(&zero).copied().unwrap_or(0.0);
    let pairs = spec
        .weights
        .iter()
        .filter(|(o, &w)| w > 0.0 && is_positive_half(o))
        .map(|(o, &w)| (o.clone(), w))
        .collect();
    Ok(Kernel {
        spec: spec.clone(),
        stay,
        pairs,
    })
}

/// First nonzero coordinate is positive.
fn is_positive_half(offset: &[i64]) -> bool {
    offset.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

/// Index `[Z^d : span(generators)]` by integer row reduction; 0 when the
/// span has rank below `dim`.
fn sublattice_index(generators: &[&Offset], dim: usize) -> u64 {
    let mut rows: Vec<Vec<i128>> = generators
        .iter()
        .map(|g| g.iter().map(|&c| c as i128).collect())
        .collect();
    let mut rank = 0;
    for col in 0..dim {
        loop {
            let pivot = (rank..rows.len())
                .filter(|&r| rows[r][col] != 0)
                .min_by_key(|&r| rows[r][col].abs());
            let Some(p) = pivot else { break };
            rows.swap(rank, p);
            let mut done = true;
            for r in rank + 1..rows.len() {
                let q = rows[r][col] / rows[rank][col];
                if q != 0 {
                    for c in col..dim {
                        rows[r][c] -= q * rows[rank][c];
                    }
                }
                if rows[r][col] != 0 {
                    done = false;
                }
            }
            if done {
                rank += 1;
                break;
            }
        }
        if rank <= col {
            return 0;
        }
    }
    (0..dim).map(|i| rows[i][i].unsigned_abs() as u64).product()
}

/// A validated kernel. Immutable; share freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    spec: KernelSpec,
    stay: f64,
    /// One representative per `{j, -j}` pair, with weight `p(j)`.
    pairs: Vec<(Offset, f64)>,
}

impl Kernel {
    pub fn simple_random_walk(dim: usize) -> Self {
        KernelSpec::simple_random_walk(dim)
            .validate()
            .expect("nearest-neighbour walk is a valid kernel")
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn range(&self) -> u32 {
        self.spec.range
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn weight(&self, offset: &[i64]) -> f64 {
        self.spec.weights.get(offset).copied().unwrap_or(0.0)
    }

    pub fn stay_weight(&self) -> f64 {
        self.stay
    }

    pub fn pairs(&self) -> &[(Offset, f64)] {
        &self.pairs
    }

    /// Nonzero `(offset, weight)` entries.
    pub fn support(&self) -> impl Iterator<Item = (&Offset, f64)> {
        self.spec
            .weights
            .iter()
            .filter(|(_, &w)| w > 0.0)
            .map(|(o, &w)| (o, w))
    }

    /// Largest per-axis second moment `sum_j p(j) j_a^2`.
    pub fn max_axis_variance(&self) -> f64 {
        (0..self.dim())
            .map(|a| {
                self.support()
                    .map(|(o, w)| w * (o[a] * o[a]) as f64)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Smallest torus side this kernel may act on.
    pub fn min_side(&self) -> usize {
        2 * self.range() as usize + 1
    }

    /// Stable textual description of the weights.
    pub fn fingerprint(&self) -> String {
        let mut s = format!("d={};v={}", self.dim(), self.range());
        for (o, w) in self.support() {
            let coords: Vec<String> = o.iter().map(|c| c.to_string()).collect();
            let _ = write!(s, ";[{}]={}", coords.join(","), w);
        }
        s
    }

    pub fn stencil(&self, torus: Torus) -> Result<Stencil, KernelError> {
        Stencil::new(self, torus)
    }

    /// `(P f)(i) = sum_j p(j) f(i + j)` with periodic wrap.
    pub fn apply(&self, field: &Field) -> Result<Field, KernelError> {
        if let Some(i) = field.first_non_finite() {
            return Err(KernelError::InfiniteValue(i));
        }
        let stencil = self.stencil(field.torus())?;
        let mut out = Field::zeros(field.torus());
        stencil.apply(field.values(), out.values_mut());
        Ok(out)
    }
}

pub fn apply_kernel(kernel: &Kernel, field: &Field) -> Result<Field, KernelError> {
    kernel.apply(field)
}

/// `p_m(j)` for every `|j| <= v m`, by m-fold convolution of a delta on a
/// box of the given radius.
pub fn m_step_probs(
    kernel: &Kernel,
    m: usize,
    radius: usize,
) -> Result<BTreeMap<Offset, f64>, KernelError> {
    let reach = kernel.range() as usize * m;
    if radius < reach {
        return Err(KernelError::RadiusTooSmall {
            radius,
            needed: reach,
        });
    }
    let dim = kernel.dim();
    let torus = Torus::new(dim, 2 * radius.max(kernel.range() as usize) + 1);
    let stencil = kernel.stencil(torus)?;
    let mut cur = Field::delta(torus, &vec![0; dim], 1.0);
    let mut next = Field::zeros(torus);
    for _ in 0..m {
        stencil.apply(cur.values(), next.values_mut());
        std::mem::swap(&mut cur, &mut next);
    }
    Ok((0..torus.len())
        .filter(|&i| torus.distance_from_origin(i) <= reach as u64)
        .map(|i| (torus.centered(i), cur.values()[i]))
        .collect())
}

#[derive(Debug, Clone)]
struct PairPlan {
    weight: f64,
    shift: isize,
    rows_plus: Vec<u32>,
    rows_minus: Vec<u32>,
}

/// Kernel specialised to one torus. Each output row is a sum of shifted
/// contiguous source rows, wrapped along the last axis.
#[derive(Debug, Clone)]
pub struct Stencil {
    torus: Torus,
    stay: f64,
    pairs: Vec<PairPlan>,
}

impl Stencil {
    pub fn new(kernel: &Kernel, torus: Torus) -> Result<Self, KernelError> {
        if torus.dim() != kernel.dim() {
            return Err(KernelError::DimensionMismatch {
                offset: vec![0; kernel.dim()],
                got: torus.dim(),
                dim: kernel.dim(),
            });
        }
        let needed = kernel.min_side();
        if torus.side() < needed {
            return Err(KernelError::DomainTooSmall {
                side: torus.side(),
                needed,
            });
        }
        let dim = torus.dim();
        let side = torus.side();
        let n_rows = torus.len() / side;
        let row_torus = (dim > 1).then(|| Torus::new(dim - 1, side));
        let row_of = |row: usize, delta: &[i64]| -> u32 {
            match row_torus {
                None => 0,
                Some(rt) => {
                    let c: Vec<i64> = rt
                        .coords(row)
                        .iter()
                        .zip(delta)
                        .map(|(a, b)| a + b)
                        .collect();
                    rt.index(&c) as u32
                }
            }
        };
        let pairs = kernel
            .pairs()
            .iter()
            .map(|(o, w)| {
                let prefix = &o[..dim - 1];
                let neg: Vec<i64> = prefix.iter().map(|c| -c).collect();
                PairPlan {
                    weight: *w,
                    shift: o[dim - 1] as isize,
                    rows_plus: (0..n_rows).map(|r| row_of(r, prefix)).collect(),
                    rows_minus: (0..n_rows).map(|r| row_of(r, &neg)).collect(),
                }
            })
            .collect();
        Ok(Stencil {
            torus,
            stay: kernel.stay_weight(),
            pairs,
        })
    }

    pub fn torus(&self) -> Torus {
        self.torus
    }

    /// `dst = P src`.
    pub fn apply(&self, src: &[f64], dst: &mut [f64]) {
        let side = self.torus.side();
        for (row, out) in dst.chunks_exact_mut(side).enumerate() {
            self.apply_segment(src, row, 0..side, out);
        }
    }

    /// `P src` on the sites `row * L + c` for `c` in `cols`, written to `out`.
    pub fn apply_segment(&self, src: &[f64], row: usize, cols: Range<usize>, out: &mut [f64]) {
        let side = self.torus.side();
        debug_assert_eq!(src.len(), self.torus.len());
        debug_assert_eq!(out.len(), cols.len());
        debug_assert!(cols.end <= side);
        let line = |r: u32| &src[r as usize * side..(r as usize + 1) * side];
        let (a, b) = (cols.start, cols.end);
        if self.stay != 0.0 {
            for (o, &s) in out.iter_mut().zip(&src[row * side + a..row * side + b]) {
                *o = self.stay * s;
            }
        } else {
            out.fill(0.0);
        }
        for pair in &self.pairs {
            // out[j] += w (plus[j + s] + minus[j - s]), indices mod side,
            // split into the runs where neither index wraps.
            let (mut plus, mut minus) = (line(pair.rows_plus[row]), line(pair.rows_minus[row]));
            if pair.shift < 0 {
                std::mem::swap(&mut plus, &mut minus);
            }
            let s = pair.shift.unsigned_abs();
            let w = pair.weight;
            let lo = a.max(s).min(b);
            let hi = b.min(side - s).max(lo);
            let (head, rest) = out.split_at_mut(lo - a);
            let (mid, tail) = rest.split_at_mut(hi - lo);
            if lo > a {
                add_pair(head, &plus[a + s..lo + s], &minus[a + side - s..lo + side - s], w);
            }
            if hi > lo {
                add_pair(mid, &plus[lo + s..hi + s], &minus[lo - s..hi - s], w);
            }
            if b > hi {
                add_pair(tail, &plus[hi + s - side..b + s - side], &minus[hi - s..b - s], w);
            }
        }
    }
}

#[inline]
fn add_pair(out: &mut [f64], plus: &[f64], minus: &[f64], w: f64) {
    for ((o, &a), &b) in out.iter_mut().zip(plus).zip(minus) {
        *o += w * (a + b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dim: usize, range: u32, entries: &[(&[i64], f64)]) -> KernelSpec {
        KernelSpec {
            dim,
            range,
            weights: entries.iter().map(|(o, w)| (o.to_vec(), *w)).collect(),
        }
    }

    #[test]
    fn srw_is_valid() {
        for d in 1..=4 {
            assert!(KernelSpec::simple_random_walk(d).validate().is_ok());
        }
    }

    #[test]
    fn parity_trapped_walk_is_rejected() {
        let s = spec(2, 2, &[(&[2, 0], 0.5), (&[-2, 0], 0.5)]);
        assert!(matches!(
            s.validate(),
            Err(KernelError::NotFullDimensional { dim: 2, .. })
        ));
        let s = spec(1, 2, &[(&[2], 0.5), (&[-2], 0.5)]);
        assert_eq!(
            s.validate(),
            Err(KernelError::NotFullDimensional { dim: 1, index: 2 })
        );
    }

    #[test]
    fn asymmetric_walk_is_rejected() {
        let s = spec(1, 1, &[(&[1], 0.6), (&[-1], 0.4)]);
        assert!(matches!(s.validate(), Err(KernelError::Asymmetric { .. })));
    }

    #[test]
    fn other_violations() {
        let s = spec(1, 1, &[(&[1], 0.3), (&[-1], 0.3)]);
        assert!(matches!(s.validate(), Err(KernelError::NonStochastic(_))));
        let s = spec(1, 1, &[(&[2], 0.5), (&[-2], 0.5)]);
        assert!(matches!(
            s.validate(),
            Err(KernelError::RangeViolation { distance: 2, .. })
        ));
        let s = spec(2, 1, &[]);
        assert_eq!(s.validate(), Err(KernelError::Empty));
        let s = spec(2, 2, &[(&[1, 1], 0.5), (&[-1, -1], 0.5)]);
        assert!(matches!(
            s.validate(),
            Err(KernelError::NotFullDimensional { index: 0, .. })
        ));
    }

    #[test]
    fn coprime_steps_generate_the_line() {
        // 2 and 3 are coprime, so {±2, ±3} spans Z even though neither does alone.
        let s = spec(1, 3, &[(&[2], 0.25), (&[-2], 0.25), (&[3], 0.25), (&[-3], 0.25)]);
        assert!(s.validate().is_ok());
        // Diagonal steps plus one axis step span Z^2.
        let s = spec(
            2,
            2,
            &[
                (&[1, 1], 0.25),
                (&[-1, -1], 0.25),
                (&[1, 0], 0.25),
                (&[-1, 0], 0.25),
            ],
        );
        assert!(s.validate().is_ok());
    }

    #[test]
    fn torus_indexing_round_trips() {
        let t = Torus::new(3, 5);
        for i in 0..t.len() {
            assert_eq!(t.index(&t.coords(i)), i);
            assert_eq!(t.index(&t.centered(i)), i);
        }
        assert_eq!(t.index(&[-1, 0, 0]), t.index(&[4, 0, 0]));
        assert_eq!(t.negate(t.index(&[1, 2, -1])), t.index(&[-1, -2, 1]));
    }

    #[test]
    fn constant_field_is_fixed() {
        let k = Kernel::simple_random_walk(3);
        let f = Field::constant(Torus::new(3, 5), 2.5);
        let g = k.apply(&f).unwrap();
        for &v in g.values() {
            assert!((v - 2.5).abs() < 1e-15);
        }
    }

    #[test]
    fn delta_spreads_to_neighbours() {
        let k = Kernel::simple_random_walk(1);
        let t = Torus::new(1, 5);
        let g = k.apply(&Field::delta(t, &[0], 1.0)).unwrap();
        assert_eq!(g.get(&[1]), 0.5);
        assert_eq!(g.get(&[-1]), 0.5);
        assert_eq!(g.get(&[0]), 0.0);
        assert_eq!(g.get(&[2]), 0.0);
    }

    #[test]
    fn two_steps_return_in_three_dimensions() {
        // Oracle: p_2(0) = sum_l p(l) p(-l) summed directly over the support.
        let k = Kernel::simple_random_walk(3);
        let oracle: f64 = k
            .support()
            .map(|(o, w)| {
                let neg: Vec<i64> = o.iter().map(|c| -c).collect();
                w * k.weight(&neg)
            })
            .sum();
        assert!((oracle - 1.0 / 6.0).abs() < 1e-15);
        let t = Torus::new(3, 5);
        let once = k.apply(&Field::delta(t, &[0, 0, 0], 1.0)).unwrap();
        let twice = k.apply(&once).unwrap();
        assert!((twice.origin() - oracle).abs() < 1e-15);
    }

    #[test]
    fn infinite_values_and_small_domains_are_rejected() {
        let k = Kernel::simple_random_walk(1);
        let mut f = Field::zeros(Torus::new(1, 5));
        f.values_mut()[3] = f64::NEG_INFINITY;
        assert_eq!(k.apply(&f), Err(KernelError::InfiniteValue(3)));
        let f = Field::zeros(Torus::new(1, 2));
        assert!(matches!(
            k.apply(&f),
            Err(KernelError::DomainTooSmall { needed: 3, .. })
        ));
    }

    #[test]
    fn m_step_small_cases() {
        let k = Kernel::simple_random_walk(1);
        let p0 = m_step_probs(&k, 0, 0).unwrap();
        assert_eq!(p0.len(), 1);
        assert_eq!(p0[&vec![0]], 1.0);
        let p2 = m_step_probs(&k, 2, 2).unwrap();
        assert_eq!(p2[&vec![-2]], 0.25);
        assert_eq!(p2[&vec![0]], 0.5);
        assert_eq!(p2[&vec![2]], 0.25);
        assert_eq!(p2[&vec![1]], 0.0);
        assert!(matches!(
            m_step_probs(&k, 3, 2),
            Err(KernelError::RadiusTooSmall { .. })
        ));
    }

    /// Number of closed nearest-neighbour paths of length `m` in `Z^d`.
    fn count_loops(dim: usize, m: usize, pos: &mut Vec<i64>) -> u64 {
        if m == 0 {
            return pos.iter().all(|&c| c == 0) as u64;
        }
        let remaining: u64 = pos.iter().map(|c| c.unsigned_abs()).sum();
        if remaining > m as u64 {
            return 0;
        }
        let mut total = 0;
        for a in 0..dim {
            for s in [-1, 1] {
                pos[a] += s;
                total += count_loops(dim, m - 1, pos);
                pos[a] -= s;
            }
        }
        total
    }

    #[test]
    fn four_step_return_matches_path_enumeration() {
        let loops = count_loops(3, 4, &mut vec![0; 3]);
        assert_eq!(loops, 90);
        let oracle = loops as f64 / 6f64.powi(4);
        let k = Kernel::simple_random_walk(3);
        let p4 = m_step_probs(&k, 4, 4).unwrap();
        assert!((p4[&vec![0, 0, 0]] - oracle).abs() < 1e-15);
    }

    #[test]
    fn segments_match_the_full_stencil() {
        let mut rng_state = 7u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut spec = KernelSpec::simple_random_walk(2);
        spec.range = 2;
        spec.weights = [(vec![2, 0], 0.1), (vec![-2, 0], 0.1), (vec![0, 2], 0.1), (vec![0, -2], 0.1), (vec![1, 0], 0.15), (vec![-1, 0], 0.15), (vec![0, 1], 0.15), (vec![0, -1], 0.15)]
            .into_iter()
            .collect();
        let k = spec.validate().unwrap();
        let t = Torus::new(2, 9);
        let st = Stencil::new(&k, t).unwrap();
        let src: Vec<f64> = (0..t.len()).map(|_| next()).collect();
        let mut full = vec![0.0; t.len()];
        st.apply(&src, &mut full);
        for row in 0..9 {
            for a in 0..9 {
                for b in a..=9 {
                    let mut out = vec![0.0; b - a];
                    st.apply_segment(&src, row, a..b, &mut out);
                    assert_eq!(out, full[row * 9 + a..row * 9 + b]);
                }
            }
        }
    }

    #[test]
    fn box_segments_cover_the_box() {
        let t = Torus::new(3, 11);
        for radius in [0, 1, 3, 5, 6] {
            let sites: Vec<usize> = t
                .box_segments(radius)
                .into_iter()
                .flat_map(|(r, c)| c.map(move |c| r * 11 + c))
                .collect();
            let expect: Vec<usize> = (0..t.len())
                .filter(|&i| t.centered(i).iter().all(|c| c.unsigned_abs() as usize <= radius))
                .collect();
            assert_eq!(sites, expect, "radius {radius}");
        }
    }
}
